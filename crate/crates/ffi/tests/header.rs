use std::path::Path;
use std::process::Command;

const PROGRAM: &str = r#"
#include "weightlab.h"

int run(void) {
    double dist[4] = {0, 1, 1, 0}, mu[2] = {1, 1}, values[2] = {1, 4}, v = 0;
    WlSpace *space = NULL;
    WlWeight *w = NULL;
    if (wl_space_new(2, dist, mu, &space) != WL_STATUS_OK) return 1;
    if (wl_weight_new(values, 2, &w) != WL_STATUS_OK) return 2;
    WlStatus s = wl_space_ap_constant(space, w, 2.0, &v);
    const char *msg = wl_last_error_message();
    wl_weight_free(w);
    wl_space_free(space);
    return s == WL_STATUS_OK && msg[0] == '\0' && WL_FAMILY_DYADIC == 0 ? 0 : 3;
}
"#;

#[test]
fn header_compiles_as_c_and_cpp() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("weightlab.h").exists());
    let dir = tempfile::tempdir().unwrap();
    for (compiler, file) in [("cc", "probe.c"), ("c++", "probe.cpp")] {
        let src = dir.path().join(file);
        std::fs::write(&src, PROGRAM).unwrap();
        let Ok(out) = Command::new(compiler)
            .args(["-Wall", "-Werror", "-c", "-o"])
            .arg(dir.path().join(format!("{file}.o")))
            .arg("-I")
            .arg(&include)
            .arg(&src)
            .output()
        else {
            eprintln!("{compiler} not available; skipping");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

mod common;

use common::oracle::rel;
use common::{arb_grid_and_weight, arb_positive, arb_space, arb_space_and_weight};
use proptest::prelude::*;
use weightlab::constants::{
    ap_constant, conjugate, dual_weight, exp_constant, fujii_wilson_constant, grid_ap_constant, grid_exp_constant,
    grid_fujii_wilson_constant, r_exponent,
};
use weightlab::corpus::{self, Lcg64};
use weightlab::czd::{cz_decompose, threshold, verify_cz, CzConfig};
use weightlab::maximal::{dyadic_maximal, hl_maximal, local_maximal};
use weightlab::{Ball, Cube, CubeFamily, DyadicGrid, LocalBasis, QuasiMetricSpace, Weight};

const TOL: f64 = 1e-12;

fn members(space: &QuasiMetricSpace, ball: &Ball) -> Vec<u32> {
    let mut m = space.members(ball).to_vec();
    m.sort_unstable();
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn space_constants_are_scale_invariant((s, w) in arb_space_and_weight(16), c in 0.01f64..100.0) {
        let w = Weight::new(w).unwrap();
        let cw = w.scaled(c).unwrap();
        prop_assert!(rel(ap_constant(&s, &w, 2.5).unwrap(), ap_constant(&s, &cw, 2.5).unwrap()) <= TOL);
        prop_assert!(rel(exp_constant(&s, &w).unwrap(), exp_constant(&s, &cw).unwrap()) <= TOL);
        prop_assert!(rel(fujii_wilson_constant(&s, &w).unwrap(), fujii_wilson_constant(&s, &cw).unwrap()) <= TOL);
    }

    #[test]
    fn grid_constants_are_scale_invariant((g, w) in arb_grid_and_weight(1, 5), c in 0.01f64..100.0) {
        let w = Weight::new(w).unwrap();
        let cw = w.scaled(c).unwrap();
        for fam in [CubeFamily::Dyadic, CubeFamily::AllCubes] {
            prop_assert!(rel(grid_ap_constant(&g, &w, 3.0, fam).unwrap(), grid_ap_constant(&g, &cw, 3.0, fam).unwrap()) <= TOL);
            prop_assert!(rel(grid_exp_constant(&g, &w, fam).unwrap(), grid_exp_constant(&g, &cw, fam).unwrap()) <= TOL);
            prop_assert!(rel(grid_fujii_wilson_constant(&g, &w, fam).unwrap(), grid_fujii_wilson_constant(&g, &cw, fam).unwrap()) <= TOL);
        }
    }

    #[test]
    fn ap_decreases_in_p((s, w) in arb_space_and_weight(20)) {
        let w = Weight::new(w).unwrap();
        let ps = [1.5, 2.0, 3.0, 5.0];
        let a: Vec<f64> = ps.iter().map(|&p| ap_constant(&s, &w, p).unwrap()).collect();
        for pair in a.windows(2) {
            prop_assert!(pair[1] <= pair[0] * (1.0 + TOL));
        }
    }

    #[test]
    fn dual_weight_identity((s, w) in arb_space_and_weight(20), p in prop::sample::select(vec![1.5, 2.0, 3.0, 5.0])) {
        let w = Weight::new(w).unwrap();
        let sigma = dual_weight(&w, p).unwrap();
        let q = conjugate(p);
        let lhs = ap_constant(&s, &sigma, q).unwrap();
        let rhs = ap_constant(&s, &w, p).unwrap().powf(q - 1.0);
        prop_assert!(rel(lhs, rhs) <= 1e-11, "{lhs} vs {rhs}");
    }

    #[test]
    fn hl_maximal_is_sublinear_and_dominates((s, f) in arb_space_and_weight(24), c in 0.0f64..10.0) {
        let g: Vec<f64> = f.iter().rev().copied().collect();
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let (mf, mg, ms) = (hl_maximal(&s, &f).unwrap(), hl_maximal(&s, &g).unwrap(), hl_maximal(&s, &sum).unwrap());
        let scaled: Vec<f64> = f.iter().map(|v| c * v).collect();
        let mc = hl_maximal(&s, &scaled).unwrap();
        for x in 0..s.n() {
            prop_assert!(ms[x] <= (mf[x] + mg[x]) * (1.0 + TOL));
            prop_assert!(mf[x] >= f[x] * (1.0 - TOL));
            prop_assert!((mc[x] - c * mf[x]).abs() <= TOL * c * mf[x] + 1e-300);
        }
    }

    #[test]
    fn dyadic_maximal_dominates_cell_values((g, f) in arb_grid_and_weight(2, 3)) {
        let m = dyadic_maximal(&g, &f, &Cube::root()).unwrap();
        let h: Vec<f64> = f.iter().map(|v| v * 0.5 + 1.0).collect();
        let sum: Vec<f64> = f.iter().zip(&h).map(|(a, b)| a + b).collect();
        let (mh, ms) = (dyadic_maximal(&g, &h, &Cube::root()).unwrap(), dyadic_maximal(&g, &sum, &Cube::root()).unwrap());
        for x in 0..g.cells() {
            prop_assert!(m[x] >= f[x] * (1.0 - TOL));
            prop_assert!(ms[x] <= (m[x] + mh[x]) * (1.0 + TOL));
        }
    }

    #[test]
    fn canonical_radii_are_complete(s in arb_space(20), seed in any::<u64>()) {
        let mut rng = Lcg64::new(seed);
        let diam = (0..s.n()).flat_map(|i| (0..s.n()).map(move |j| (i, j))).map(|(i, j)| s.dist(i, j)).fold(0.0, f64::max);
        for _ in 0..1000 {
            let c = rng.below(s.n());
            let r = rng.uniform(1e-9, 1.5 * diam + 1.0);
            let ball = Ball::new(c, r).unwrap();
            let got = members(&s, &ball);
            let canon = s.canonical_of(&ball);
            prop_assert!(s.canonical_radii(c).contains(&canon.radius));
            prop_assert_eq!(&got, &members(&s, &canon));
            let f: Vec<f64> = (0..s.n()).map(|i| (i * i % 7) as f64 + 1.0).collect();
            prop_assert_eq!(s.ball_average(&f, &ball).unwrap(), s.ball_average(&f, &canon).unwrap());
        }
    }

    #[test]
    fn doubling_holds_at_every_canonical_ball(s in arb_space(24)) {
        for ball in s.canonical_balls() {
            let r = s.doubling_ratio(ball.center, ball.radius);
            prop_assert!(r <= s.c_mu());
        }
    }

    #[test]
    fn doubling_controls_nested_balls(s in arb_space(24)) {
        let (kappa, d) = (s.kappa(), s.d_mu());
        let balls = s.canonical_balls();
        for big in &balls {
            let bm = members(&s, big);
            for small in &balls {
                let sm = members(&s, small);
                if small.radius > big.radius || !sm.iter().all(|y| bm.binary_search(y).is_ok()) {
                    continue;
                }
                let lhs = s.ball_measure(big) / s.ball_measure(small);
                let rhs = (4.0 * kappa).powf(d) * (big.radius / small.radius).powf(d);
                prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn local_maximal_vanishes_outside_the_hat((s, f) in arb_space_and_weight(24), c in 0usize..24, k in 0usize..6) {
        let c = c % s.n();
        let radii = s.canonical_radii(c);
        let basis = LocalBasis::new(&s, Ball::new(c, radii[k % radii.len()]).unwrap(), 1.0).unwrap();
        let m = local_maximal(&s, &basis, &f).unwrap();
        for (x, v) in m.iter().enumerate() {
            if !s.contains(basis.hat(), x) {
                prop_assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn level_sets_shrink_and_decompositions_are_valid(
        n in 24usize..64,
        spikes in 1usize..4,
        seed in any::<u64>(),
        delta in prop::sample::select(vec![1.0, 2.0, 4.0]),
        factor in 1.0f64..3.0,
    ) {
        let s = corpus::unit_line(n, &corpus::Masses::Unit).unwrap();
        let w = corpus::spike_weight(n, spikes, 5000.0, seed).unwrap();
        let far = *s.canonical_radii(n / 2).last().unwrap();
        let basis = LocalBasis::new(&s, Ball::new(n / 2, far).unwrap(), delta).unwrap();
        let t = threshold(&s, &basis, w.values(), 2.0).unwrap();
        let lo = cz_decompose(&s, &basis, w.values(), &CzConfig::new(&s, &basis, 2.0, t).unwrap()).unwrap();
        let hi = cz_decompose(&s, &basis, w.values(), &CzConfig::new(&s, &basis, 2.0, factor * t).unwrap()).unwrap();
        prop_assert!(hi.omega.iter().all(|x| lo.omega.contains(x)));
        for dec in [&lo, &hi] {
            for r in verify_cz(&s, &basis, w.values(), dec, "p").unwrap() {
                prop_assert!(r.pass, "{:?}", r);
            }
        }
    }

    #[test]
    fn cascades_are_positive_and_reproducible(depth in 1u32..9, bound in 1.0f64..8.0, seed in any::<u64>()) {
        let g = DyadicGrid::lebesgue(1, depth).unwrap();
        let a = corpus::cascade_weight(&g, bound, seed).unwrap();
        let b = corpus::cascade_weight(&g, bound, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert!(a.values().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn exponent_decreases_to_one(a in 1.0f64..1e6, b in 1.0f64..1e6, d in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (_, r_lo) = r_exponent(lo, 1.0, d);
        let (_, r_hi) = r_exponent(hi, 1.0, d);
        prop_assert!(r_hi <= r_lo && r_hi > 1.0);
    }

    #[test]
    fn positive_weights_only(v in arb_positive(8), i in 0usize..8) {
        let mut bad = v.clone();
        bad[i] = 0.0;
        prop_assert!(Weight::new(v).is_ok());
        prop_assert!(Weight::new(bad).is_err());
    }
}

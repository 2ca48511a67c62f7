//! Property tests for the algebraic identities and ordering oracles.

use proptest::prelude::*;

use notgate::expansions::dyson_terms;
use notgate::mocma::{dominates, hv_contribution, hypervolume_2d, nondominated_sort};
use notgate::pulse::PulseCoefficients;
use notgate::su2::{
    brackets, fidelity, su2_exp, Complex2x2, Hermitian2, Unitary2, IDENTITY, ZERO,
};
use num_complex::Complex64 as C64;

fn arb_matrix() -> impl Strategy<Value = Complex2x2> {
    proptest::array::uniform8(-5.0..5.0_f64).prop_map(|v| {
        Complex2x2::new([
            [C64::new(v[0], v[1]), C64::new(v[2], v[3])],
            [C64::new(v[4], v[5]), C64::new(v[6], v[7])],
        ])
    })
}

fn arb_axis() -> impl Strategy<Value = [f64; 3]> {
    // |c| <= sqrt(3) * 5.77 < 10
    proptest::array::uniform3(-5.77..5.77_f64)
}

fn arb_unitary() -> impl Strategy<Value = Unitary2> {
    (arb_axis(), -3.1..3.1_f64).prop_map(|(c, phase)| {
        let u = su2_exp(c).unwrap();
        Unitary2::new(u.matrix().scale(C64::from_polar(1.0, phase))).unwrap()
    })
}

proptest! {
    #[test]
    fn bracket_parts_sum_back_exactly(x in arb_matrix()) {
        let b = brackets(&x).unwrap();
        let sum = *b.herm.matrix() + b.antiherm;
        prop_assert!(sum.approx_eq(&x, 1e-13));
    }

    #[test]
    fn bracket_nesting_annihilates(x in arb_matrix()) {
        let b = brackets(&x).unwrap();
        let nested = brackets(&b.antiherm).unwrap();
        prop_assert!(nested.herm.matrix().approx_eq(&ZERO, 1e-12));
    }

    #[test]
    fn herm_antiherm_trace_orthogonality(x in arb_matrix(), y in arb_matrix()) {
        let bx = brackets(&x).unwrap();
        let by = brackets(&y).unwrap();
        let cross = (*by.herm.matrix() * bx.antiherm).re_trace();
        prop_assert!(cross.abs() < 1e-10, "Re Tr(<Y>_H <X>_A) = {cross:e}");
    }

    #[test]
    fn su2_exp_inverse(c in arb_axis()) {
        let u = su2_exp(c).unwrap();
        let v = su2_exp([-c[0], -c[1], -c[2]]).unwrap();
        let prod = *u.matrix() * *v.matrix();
        prop_assert!(prod.approx_eq(&IDENTITY, 1e-12));
    }

    #[test]
    fn fidelity_invariant_under_left_multiplication(
        w in arb_unitary(), u in arb_unitary(), v in arb_unitary()
    ) {
        let lhs = fidelity(&w, &u);
        let rhs = fidelity(&(v * w), &(v * u));
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn dyson_homogeneity(
        ax in -1.0..1.0_f64, az in -1.0..1.0_f64, eps in 0.01..0.9_f64
    ) {
        let dh = move |t: f64| {
            Hermitian2::from_bloch(0.0, [ax * (2.0 * t).sin(), 0.0, az * t.cos()])
        };
        let unit = dyson_terms(dh, std::f64::consts::PI, 4, 64).unwrap();
        let scaled = dyson_terms(move |t| dh(t).scale(eps), std::f64::consts::PI, 4, 64).unwrap();
        for n in 1..=4 {
            let expected = unit.p[n - 1].scale_re(eps.powi(n as i32));
            let dev = scaled.p[n - 1].dist(&expected);
            let tol = 1e-12 * expected.frobenius_norm() + 1e-13;
            prop_assert!(dev < tol, "order {n}: deviation {dev:e} vs tol {tol:e}");
        }
    }

    #[test]
    fn herm_p2_equals_half_p1_squared(
        ax in -1.0..1.0_f64, ay in -1.0..1.0_f64, az in -1.0..1.0_f64
    ) {
        // <P2>_H = P1^2 / 2 for any Hermitian-valued generator. The discrete
        // cumulative trapezoid carries an O(dt^2) boundary residual, so the
        // tolerance scales with the grid.
        let dh = move |t: f64| {
            Hermitian2::from_bloch(0.1 * t.cos(), [ax * t.sin(), ay * (3.0 * t).cos(), az])
        };
        let stack = dyson_terms(dh, std::f64::consts::PI, 2, 2048).unwrap();
        let herm_p2 = notgate::su2::hermitian_part(&stack.p[1]);
        let half_p1_sq = (stack.p[0] * stack.p[0]).scale_re(0.5);
        prop_assert!(
            herm_p2.approx_eq(&half_p1_sq, 1e-5),
            "residual {:e}",
            herm_p2.dist(&half_p1_sq)
        );
    }

    #[test]
    fn sort_matches_peeling_oracle(points in proptest::collection::vec(
        proptest::array::uniform2(0.0..10.0_f64), 1..60
    )) {
        let fs: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        let ranks = nondominated_sort(&fs);
        prop_assert_eq!(ranks, peeling_ranks(&fs));
    }

    #[test]
    fn removing_min_contributor_never_hurts_others(points in proptest::collection::vec(
        proptest::array::uniform2(0.0..10.0_f64), 2..30
    )) {
        let fs: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        let ranks = nondominated_sort(&fs);
        let mut front: Vec<[f64; 2]> = fs
            .iter()
            .zip(&ranks)
            .filter(|(_, &r)| r == 0)
            .map(|(f, _)| [f[0], f[1]])
            .collect();
        front.dedup_by(|a, b| a == b);
        prop_assume!(front.len() >= 2);
        let reference = [11.0, 11.0];
        let before: Vec<f64> = (0..front.len())
            .map(|i| hv_contribution(&front, reference, i).unwrap())
            .collect();
        let min_idx = (0..front.len())
            .min_by(|&a, &b| before[a].total_cmp(&before[b]))
            .unwrap();
        let reduced: Vec<[f64; 2]> = front
            .iter()
            .enumerate()
            .filter_map(|(i, p)| (i != min_idx).then_some(*p))
            .collect();
        for (j, p) in reduced.iter().enumerate() {
            let old = before[front.iter().position(|q| q == p).unwrap()];
            let new = hv_contribution(&reduced, reference, j).unwrap();
            prop_assert!(new >= old - 1e-12, "contribution dropped: {new} < {old}");
        }
    }

    #[test]
    fn constrained_pulses_hit_the_target_exactly(
        a in proptest::collection::vec(-1.5..1.5_f64, 0..3),
        b in proptest::collection::vec(-2.0..2.0_f64, 1..4)
    ) {
        prop_assume!(a.len() + 1 == b.len());
        let c = PulseCoefficients::constrained(&a, &b).unwrap();
        let target = su2_exp([std::f64::consts::PI, 0.0, 0.0]).unwrap();
        let f = fidelity(&target, &c.propagator(std::f64::consts::PI).unwrap());
        prop_assert!((f - 1.0).abs() < 1e-12);
        // the propagator stays unitary everywhere
        for frac in [0.21, 0.5, 0.83] {
            let u = c.propagator(frac * std::f64::consts::PI).unwrap();
            let dev = (u.matrix().dagger() * *u.matrix() - IDENTITY).frobenius_norm();
            prop_assert!(dev < 1e-10);
        }
    }
}

/// Independent oracle: repeatedly peel the minimal elements under the
/// dominance order.
fn peeling_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut ranks = vec![usize::MAX; n];
    let mut rank = 0;
    loop {
        let remaining: Vec<usize> = (0..n).filter(|&i| ranks[i] == usize::MAX).collect();
        if remaining.is_empty() {
            return ranks;
        }
        for &i in &remaining {
            let dominated = remaining
                .iter()
                .any(|&j| j != i && dominates(&points[j], &points[i]));
            if !dominated {
                ranks[i] = rank;
            }
        }
        rank += 1;
    }
}

#[test]
fn hypervolume_matches_grid_oracle() {
    // coarse Monte Carlo / grid check of the strip formula
    let front = [[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]];
    let reference = [4.0, 4.0];
    let n = 400;
    let mut covered = 0usize;
    for i in 0..n {
        for j in 0..n {
            let x = (i as f64 + 0.5) / n as f64 * reference[0];
            let y = (j as f64 + 0.5) / n as f64 * reference[1];
            if front.iter().any(|p| p[0] <= x && p[1] <= y) {
                covered += 1;
            }
        }
    }
    let estimate = covered as f64 / (n * n) as f64 * reference[0] * reference[1];
    let exact = hypervolume_2d(&front, reference).unwrap();
    assert!((estimate - exact).abs() < 0.05, "grid {estimate} vs exact {exact}");
}

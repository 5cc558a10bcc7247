use dstab_core::cpoly::{CPoly, CRational};
use dstab_core::positivity::{
    check_positive_second_order, check_positive_siso, check_pr_real_matrix, full_axis_grid, log_grid,
    nyquist_disk_check,
};
use dstab_core::sweep::{random_rational, rng};
use dstab_core::Complex64;
use proptest::prelude::*;

fn cplx(s: f64) -> impl Strategy<Value = Complex64> {
    (-s..s, -s..s).prop_map(|(re, im)| Complex64::new(re, im))
}

fn quadratic(a1: Complex64, a0: Complex64, b1: Complex64, b0: Complex64) -> CRational<f64> {
    CRational::new(CPoly::new(vec![a0, a1]), CPoly::new(vec![b0, b1, Complex64::new(1.0, 0.0)])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn siso_agrees_with_real_equivalent(seed in any::<u64>()) {
        let h = random_rational(&mut rng(seed), 3);
        let a = check_positive_siso(&h).unwrap();
        let b = check_pr_real_matrix(&h.real_equiv().unwrap()).unwrap();
        prop_assume!(a.margin.abs() > 1e-7 && b.margin.abs() > 1e-7);
        prop_assert_eq!(a.is_positive, b.is_positive);
    }

    #[test]
    fn second_order_test_agrees_with_exact(
        a1 in 0.0f64..5.0,
        a0 in cplx(5.0),
        b1 in (0.0f64..6.0, -3.0f64..3.0),
        b0 in cplx(6.0),
    ) {
        let (a1, b1) = (Complex64::new(a1, 0.0), Complex64::new(b1.0, b1.1));
        let p3 = check_positive_second_order(a1, a0, b1, b0);
        let ex = check_positive_siso(&quadratic(a1, a0, b1, b0)).unwrap();
        prop_assume!(!p3.boundary && !ex.boundary && p3.margin.abs() > 1e-7 && ex.margin.abs() > 1e-7);
        prop_assert_eq!(p3.is_positive, ex.is_positive);
    }

    /// A passing disk test certifies the loop `ĥ/(1 − ρĥ)`.
    #[test]
    fn nyquist_pass_implies_positive_loop(
        a in 0.2f64..20.0,
        b in 0.2f64..20.0,
        k in 0.1f64..10.0,
        rho in 0.05f64..3.0,
    ) {
        let h = CRational::from_real(&[k], &[a * b, a + b, 1.0]).unwrap();
        let r = nyquist_disk_check(&h, rho, &full_axis_grid()).unwrap();
        let closed = h.feedback(Complex64::new(-rho, 0.0)).unwrap();
        let rep = check_positive_siso(&closed).unwrap();
        if r.pass {
            prop_assert!(rep.is_positive || rep.boundary);
        }
    }

    /// `d + Σ r_k/(ν + a_k + j b_k)` with positive `r_k, a_k` is positive,
    /// and its real part on the axis is non-negative.
    #[test]
    fn constructed_positive_sums(
        d in 0.0f64..2.0,
        terms in prop::collection::vec((0.1f64..3.0, 0.1f64..5.0, -5.0f64..5.0), 1..4),
    ) {
        let mut h = CRational::from_real(&[d], &[1.0]).unwrap();
        for &(r, a, b) in &terms {
            let t = CRational::new(
                CPoly::from_real(&[r]),
                CPoly::new(vec![Complex64::new(a, b), Complex64::new(1.0, 0.0)]),
            ).unwrap();
            h = h.add(&t).unwrap();
        }
        let rep = check_positive_siso(&h).unwrap();
        prop_assert!(rep.is_positive);
        for w in log_grid(1e-2, 1e3, 60) {
            for s in [Complex64::new(0.0, w), Complex64::new(0.0, -w)] {
                prop_assert!(h.eval(s).unwrap().re >= -1e-12);
            }
        }
    }
}

#[test]
fn first_order_disk_example() {
    let h = CRational::from_real(&[1.0], &[1.0, 1.0]).unwrap();
    let r = nyquist_disk_check(&h, 1.0, &full_axis_grid()).unwrap();
    assert!(r.pass);
    assert!(r.touches_critical_point);
}

#[test]
fn lossless_integrator_is_positive() {
    let h = CRational::from_real(&[1.0], &[0.0, 1.0]).unwrap();
    assert!(check_positive_siso(&h).unwrap().is_positive);
    let m = h.real_equiv().unwrap();
    assert!(check_pr_real_matrix(&m).unwrap().is_positive);
}

#[test]
fn rotated_lag_fails_with_witness() {
    // e^{j0.9}/(ν+1) has negative real part for ω < -tan(0.67)
    let g = CRational::from_real(&[1.0], &[1.0, 1.0]).unwrap().rotate(0.9);
    let rep = check_positive_siso(&g).unwrap();
    assert!(!rep.is_positive);
    assert!(!rep.witnesses.is_empty());
}

use num_complex::Complex64;
use proptest::prelude::*;
use tauber_core::continuation::{continue_g, poles};
use tauber_core::quadrature::integrate_piecewise;
use tauber_core::transform::{interval_contribution, partial_sum, swing};
use tauber_core::{StaircaseFamily, Variant};

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::OneSided),
        Just(Variant::Symmetric),
        Just(Variant::Asymmetric)
    ]
}

fn family() -> impl Strategy<Value = StaircaseFamily> {
    (variant(), 0.2f64..0.95, 0.3f64..3.0, 0.3f64..3.0).prop_map(|(v, g, up, down)| {
        let down = match v {
            Variant::OneSided => 0.0,
            Variant::Symmetric => up,
            Variant::Asymmetric if (up - down).abs() < 1e-3 => down + 0.5,
            Variant::Asymmetric => down,
        };
        let f = StaircaseFamily::new(v, g, up, down, 2.0, 400).unwrap();
        // steep, wide families start late; keep 40 active intervals regardless
        f.with_i_cap(f.i_start() + 40).unwrap()
    })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_is_monotone_and_nonnegative(f in family(), lo in 1.0f64..1e6, span in 1.0f64..1e4) {
        let mut xs = f.breakpoint_samples(lo, lo * span);
        xs.push(lo);
        xs.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for x in xs {
            let v = f.eval_f(x).unwrap();
            prop_assert!(v >= prev, "f({}) = {} < {}", x, v, prev);
            prev = v;
        }
    }

    #[test]
    fn contribution_matches_quadrature(f in family(), k in 0u32..20, re in -1.0f64..2.5, im in -15.0f64..15.0) {
        let i = f.i_start() + k;
        let s = Complex64::new(re, im);
        let geo = f.interval(i).unwrap();
        let q = integrate_piecewise(&f, s, geo.lower(), geo.upper(), 1e-13).unwrap().value;
        let c = interval_contribution(&f, i, s).unwrap();
        prop_assert!((c - q).norm() <= 1e-8 * q.norm().max(1e-14), "{} vs {}", c, q);
    }

    #[test]
    fn evaluators_commute_with_conjugation(f in family(), k in 0u32..10, re in -1.4f64..2.0, im in 0.1f64..18.0) {
        let s = Complex64::new(re, im);
        let t = s.conj();
        let i = f.i_start() + k;
        let a = interval_contribution(&f, i, s).unwrap();
        let b = interval_contribution(&f, i, t).unwrap();
        prop_assert!(rel(a, b.conj()) <= 1e-14);
        let (wa, wb) = (swing(&f, i, s).unwrap(), swing(&f, i, t).unwrap());
        prop_assert!((wa - wb).abs() <= 1e-14 * wa.max(1e-300));
        let pa = partial_sum(&f, s, 10).unwrap().total();
        let pb = partial_sum(&f, t, 10).unwrap().total();
        prop_assert!(rel(pa, pb.conj()) <= 1e-14);
        if let (Ok(ga), Ok(gb)) = (continue_g(&f, s, 1e-13), continue_g(&f, t, 1e-13)) {
            prop_assert!(rel(ga.value, gb.value.conj()) <= 1e-13);
        }
    }

    #[test]
    fn swing_bounds_the_whole_interval(f in family(), k in 0u32..20, re in -1.0f64..2.0, im in -10.0f64..10.0) {
        let i = f.i_start() + k;
        let s = Complex64::new(re, im);
        let whole = interval_contribution(&f, i, s).unwrap().norm();
        prop_assert!(swing(&f, i, s).unwrap() >= whole);
    }

    #[test]
    fn continuation_agrees_with_convergent_sum(f in family(), offset in 0.3f64..2.0, im in -12.0f64..12.0) {
        let s = Complex64::new(2.0 * f.gamma() - 1.0 + offset, im);
        let long = f.with_i_cap(1000).unwrap();
        let limit = partial_sum(&long, s, long.i_cap() - long.i_start()).unwrap().total();
        let g = continue_g(&f, s, 1e-14).unwrap().value;
        prop_assert!((g - limit).norm() <= 1e-8 * g.norm().max(1.0), "{} vs {}", g, limit);
    }

    #[test]
    fn pole_lattice_is_periodic(f in family(), m in -3i64..3) {
        let period = 2.0 * std::f64::consts::PI / f.ln_base();
        let lo = f64::from(m as i32) * period - 0.5;
        let row: Vec<_> = poles(&f, (-2.0, 1.0), (lo, lo + 1.0));
        let next: Vec<_> = poles(&f, (-2.0, 1.0), (lo + period, lo + period + 1.0));
        prop_assert_eq!(row.len(), next.len());
        for (a, b) in row.iter().zip(&next) {
            prop_assert_eq!(a.j, b.j);
            prop_assert!((b.location.im - a.location.im - period).abs() < 1e-9);
        }
    }
}

// wide interval (u ≈ 0.997) at large |s|: the power series cancels by ~8 digits here
#[test]
fn wide_interval_at_large_imaginary_part() {
    let f = StaircaseFamily::new(Variant::OneSided, 0.5383430597010643, 2.6028183493049215, 0.0, 2.0, 400).unwrap();
    let f = f.with_i_cap(f.i_start() + 40).unwrap();
    let i = f.i_start();
    let s = Complex64::new(1.928847471353028, -14.440960497568097);
    let c = interval_contribution(&f, i, s).unwrap();
    // 40-digit reference
    let reference = Complex64::new(0.010080495123215977, -0.0004886098241206644);
    assert!(rel(c, reference) <= 1e-12, "{c} vs {reference}");
}

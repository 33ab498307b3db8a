use monogenic::analysis::{admissibility, bessel_j, moment, sphere_fourier_closed, sphere_fourier_integral};
use monogenic::families::{wavelet, Family, FamilySpec};
use monogenic::terms::{int, ratio, Rational, WeightParams};
use monogenic::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bessel_three_term_recurrence(nu in 1u32..=6, x in 0.1f64..40.0) {
        let nu = f64::from(nu);
        let lower = bessel_j(nu - 1.0, x);
        let upper = bessel_j(nu + 1.0, x);
        let middle = 2.0 * nu / x * bessel_j(nu, x);
        let scale = lower.abs() + upper.abs() + middle.abs();
        prop_assert!((lower + upper - middle).abs() <= 1e-9 * scale, "nu={nu} x={x}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sphere_integral_lemma(m in 2u32..=3, r in 0.0f64..3.0, rho in 0.0f64..5.0) {
        let (re, im) = sphere_fourier_integral(m, r, rho).unwrap();
        let closed = sphere_fourier_closed(m, r, rho).unwrap();
        prop_assert!((re - closed).abs() <= 1e-8 && im.abs() <= 1e-8);
    }
}

/// A draw inside the vanishing-moment window, or `None` if the parameters
/// miss it. The moment order `k` shares the parity of `ell` so the integral
/// is not trivially zero.
fn windowed(family: Family, m: u32, ell: u32, mu: Rational, alpha: Rational, beta: Rational) -> Option<(u32, FamilySpec)> {
    let k = ell - 2;
    let bound = match family {
        Family::S => -int(i64::from(m + ell)) - int(2) * (&mu + &alpha),
        Family::K => -int(i64::from(m + ell)) - int(2) * &alpha,
    };
    if !(k > 0 && int(i64::from(k)) < bound) {
        return None;
    }
    if family == Family::S {
        // the orthogonality window 4t < 1 - m - 2(mu + alpha)
        if !(int(4 * i64::from(ell)) < int(1 - i64::from(m)) - int(2) * (&mu + &alpha)) {
            return None;
        }
    }
    let params = WeightParams::new(m, mu, alpha, beta).ok()?;
    Some((k, FamilySpec::new(family, ell, params).ok()?))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, max_global_rejects: 4096, ..ProptestConfig::default() })]

    #[test]
    fn moments_vanish_inside_the_window(
        is_s in any::<bool>(),
        m in 2u32..=3,
        ell in 3u32..=5,
        p in 1i64..14,
        q in 30i64..160,
        b in 1i64..12,
    ) {
        prop_assume!(p % 7 != 0 && q % 11 != 0);
        let family = if is_s { Family::S } else { Family::K };
        let mu = if is_s { ratio(p, 7) } else { int(0) };
        let beta = if is_s { int(0) } else { ratio(b, 4) };
        let Some((k, spec)) = windowed(family, m, ell, mu, ratio(-q, 11), beta) else {
            return Err(TestCaseError::reject("outside the window"));
        };
        let psi = wavelet(&spec).unwrap();
        match moment(k, &psi) {
            Ok(r) => {
                prop_assert!(r.abs_integral > 0.0);
                prop_assert!(r.value.abs() <= 1e-8 * r.abs_integral, "{spec:?} k={k}: {r:?}");
            }
            Err(Error::Divergent { .. }) => return Err(TestCaseError::reject("not integrable")),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn admissibility_is_stable_under_tolerance_halving() {
    let specs = [
        (Family::K, 1, int(0), int(0), int(1)),
        (Family::K, 2, int(0), ratio(-3, 2), ratio(1, 2)),
        (Family::S, 1, int(0), int(-6), int(0)),
        (Family::S, 2, ratio(1, 3), ratio(-17, 2), int(0)),
    ];
    for (family, ell, mu, alpha, beta) in specs {
        let spec = FamilySpec::new(family, ell, WeightParams::new(2, mu, alpha, beta).unwrap()).unwrap();
        let coarse = admissibility(&spec, 1e-9).unwrap();
        let fine = admissibility(&spec, 5e-10).unwrap();
        assert!(coarse.converged && fine.converged, "{spec:?}");
        assert!(((coarse.constant - fine.constant) / fine.constant).abs() < 1e-4, "{spec:?}");
    }
}

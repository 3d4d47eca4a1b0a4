//! Background expansion law: scale factor a(t), Hubble rate, and the comoving
//! drift integral used by the expanding transport step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// a(t) = 1.
    Static,
    /// a(t) = (1 + t/t0)^p.
    PowerLaw { p: f64, t0: f64 },
    /// Piecewise-linear interpolation of `(time, a)` samples.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl Default for Background {
    fn default() -> Self {
        Background::Static
    }
}

impl Background {
    pub fn power_law(p: f64, t0: f64) -> Result<Self> {
        let bg = Background::PowerLaw { p, t0 };
        bg.validate()?;
        Ok(bg)
    }

    /// Power law with exponent `p` whose scale factor grows by `factor`
    /// between t = 0 and `t_end`. A factor of 1 gives the static background.
    pub fn power_law_reaching(factor: f64, t_end: f64, p: f64) -> Result<Self> {
        if !(factor >= 1.0 && factor.is_finite()) {
            return Err(Error::Parameter(format!(
                "expansion factor must be >= 1 (got {factor})"
            )));
        }
        if !(t_end > 0.0) || !(p > 0.0) {
            return Err(Error::Parameter("t_end and p must be positive".into()));
        }
        if factor == 1.0 {
            return Ok(Background::Static);
        }
        let t0 = t_end / (factor.powf(1.0 / p) - 1.0);
        Self::power_law(p, t0)
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let bg = Background::Tabulated { times, values };
        bg.validate()?;
        Ok(bg)
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Background::Static)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Background::Static => Ok(()),
            Background::PowerLaw { p, t0 } => {
                if !(p.is_finite() && *p >= 0.0) {
                    return Err(Error::Parameter(format!(
                        "power-law exponent must be >= 0 (got {p})"
                    )));
                }
                if !(t0.is_finite() && *t0 > 0.0) {
                    return Err(Error::Parameter(format!(
                        "power-law t0 must be > 0 (got {t0})"
                    )));
                }
                Ok(())
            }
            Background::Tabulated { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::Parameter(
                        "tabulated background needs >= 2 samples with matching lengths".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Parameter(
                        "tabulated times must be strictly increasing".into(),
                    ));
                }
                if values.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                    return Err(Error::Parameter("scale factor samples must be > 0".into()));
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Parameter(
                        "scale factor samples must be nondecreasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Scale factor a(t).
    pub fn scale_at(&self, t: f64) -> Result<f64> {
        match self {
            Background::Static => {
                check_time(t, 0.0, f64::INFINITY)?;
                Ok(1.0)
            }
            Background::PowerLaw { p, t0 } => {
                check_time(t, 0.0, f64::INFINITY)?;
                Ok((1.0 + t / t0).powf(*p))
            }
            Background::Tabulated { times, values } => {
                let (lo, hi) = (times[0], times[times.len() - 1]);
                check_time(t, lo, hi)?;
                // first sample strictly after t, clamped so t == hi uses the last segment
                let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t_a, t_b) = (times[k - 1], times[k]);
                let (a_a, a_b) = (values[k - 1], values[k]);
                Ok(a_a + (a_b - a_a) * (t - t_a) / (t_b - t_a))
            }
        }
    }

    /// Hubble rate H(t) = a'(t)/a(t). For tabulated data the segment slope is
    /// used (right-continuous at sample points).
    pub fn hubble(&self, t: f64) -> Result<f64> {
        match self {
            Background::Static => {
                check_time(t, 0.0, f64::INFINITY)?;
                Ok(0.0)
            }
            Background::PowerLaw { p, t0 } => {
                check_time(t, 0.0, f64::INFINITY)?;
                Ok(p / (t0 + t))
            }
            Background::Tabulated { times, values } => {
                let a = self.scale_at(t)?;
                let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let slope = (values[k] - values[k - 1]) / (times[k] - times[k - 1]);
                Ok(slope / a)
            }
        }
    }

    /// Trapezoid approximation of `a(t_n) * integral_{t_n}^{t_n1} ds / a(s)^2`,
    /// i.e. the comoving displacement per unit velocity over the step.
    pub fn drift(&self, t_n: f64, t_n1: f64) -> Result<f64> {
        if !(t_n1 > t_n) {
            return Err(Error::Parameter(format!(
                "step end {t_n1} must be after step start {t_n}"
            )));
        }
        let a0 = self.scale_at(t_n)?;
        let a1 = self.scale_at(t_n1)?;
        Ok(a0 * (t_n1 - t_n) / 2.0 * (1.0 / (a1 * a1) + 1.0 / (a0 * a0)))
    }

    /// Dimensionless drift factor: `drift / (t_n1 - t_n)`. Exactly 1 for the
    /// static background.
    pub fn drift_factor(&self, t_n: f64, t_n1: f64) -> Result<f64> {
        if !(t_n1 > t_n) {
            return Err(Error::Parameter(format!(
                "step end {t_n1} must be after step start {t_n}"
            )));
        }
        let a0 = self.scale_at(t_n)?;
        let a1 = self.scale_at(t_n1)?;
        Ok(a0 * 0.5 * (1.0 / (a1 * a1) + 1.0 / (a0 * a0)))
    }

    /// Exact value of `integral_{t_a}^{t_b} ds / a(s)^2`.
    pub fn inverse_square_integral(&self, t_a: f64, t_b: f64) -> Result<f64> {
        if t_b < t_a {
            return Err(Error::Parameter(format!(
                "integral bounds reversed: {t_a} > {t_b}"
            )));
        }
        match self {
            Background::Static => {
                check_time(t_a, 0.0, f64::INFINITY)?;
                Ok(t_b - t_a)
            }
            Background::PowerLaw { p, t0 } => {
                check_time(t_a, 0.0, f64::INFINITY)?;
                let (xa, xb) = (1.0 + t_a / t0, 1.0 + t_b / t0);
                let e = 1.0 - 2.0 * p;
                if e.abs() < 1e-12 {
                    Ok(t0 * (xb / xa).ln())
                } else {
                    Ok(t0 / e * (xb.powf(e) - xa.powf(e)))
                }
            }
            Background::Tabulated { times, .. } => {
                check_time(t_a, times[0], times[times.len() - 1])?;
                check_time(t_b, times[0], times[times.len() - 1])?;
                // integrate segment by segment; a is linear on each
                let mut knots = vec![t_a];
                knots.extend(times.iter().copied().filter(|&s| s > t_a && s < t_b));
                knots.push(t_b);
                let mut total = 0.0;
                for w in knots.windows(2) {
                    let (s0, s1) = (w[0], w[1]);
                    let (a0, a1) = (self.scale_at(s0)?, self.scale_at(s1)?);
                    total += if a1 == a0 {
                        (s1 - s0) / (a0 * a0)
                    } else {
                        // a = a0 + k (s - s0): integral = (1/a0 - 1/a1) / k
                        let k = (a1 - a0) / (s1 - s0);
                        (1.0 / a0 - 1.0 / a1) / k
                    };
                }
                Ok(total)
            }
        }
    }

    /// Comoving displacement of a cell moving with velocity `u0` at `t_n`.
    pub fn comoving_displacement(&self, u0: f64, t_n: f64, t_n1: f64) -> Result<f64> {
        Ok(u0 * self.drift(t_n, t_n1)?)
    }

    /// a(t_n) / a(t_n1), the per-step decay base.
    pub fn decay_ratio(&self, t_n: f64, t_n1: f64) -> Result<f64> {
        Ok(self.scale_at(t_n)? / self.scale_at(t_n1)?)
    }
}

/// Free-function form of [`Background::scale_at`].
pub fn scale_at(bg: &Background, t: f64) -> Result<f64> {
    bg.scale_at(t)
}

/// Free-function form of [`Background::comoving_displacement`].
pub fn comoving_displacement(bg: &Background, u0: f64, t_n: f64, t_n1: f64) -> Result<f64> {
    bg.comoving_displacement(u0, t_n, t_n1)
}

fn check_time(t: f64, lo: f64, hi: f64) -> Result<()> {
    if t >= lo && t <= hi {
        Ok(())
    } else {
        Err(Error::Range { t, lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn static_is_unity() {
        let bg = Background::Static;
        assert_eq!(bg.scale_at(7.3).unwrap(), 1.0);
        assert_eq!(bg.hubble(7.3).unwrap(), 0.0);
    }

    #[test]
    fn power_law_values() {
        let bg = Background::power_law(1.0, 1.0).unwrap();
        assert_eq!(bg.scale_at(0.0).unwrap(), 1.0);
        let bg = Background::power_law(2.0 / 3.0, 1.0).unwrap();
        let a = bg.scale_at(7.0).unwrap();
        assert!((a - 4.0).abs() <= 4.0 * 4.0 * f64::EPSILON, "a = {a}");
        // H = p/(t0+t)
        assert!((bg.hubble(2.0).unwrap() - (2.0 / 3.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn power_law_reaching_hits_factor() {
        let bg = Background::power_law_reaching(3.5, 0.25, 2.0 / 3.0).unwrap();
        let a = bg.scale_at(0.25).unwrap();
        assert!((a - 3.5).abs() < 1e-12);
        assert!(Background::power_law_reaching(1.0, 1.0, 1.0)
            .unwrap()
            .is_static());
        assert!(Background::power_law_reaching(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_reports_range() {
        let bg = Background::tabulated(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 2.0]).unwrap();
        assert_eq!(bg.scale_at(0.5).unwrap(), 1.5);
        assert_eq!(bg.scale_at(1.0).unwrap(), 2.0);
        assert_eq!(bg.scale_at(3.0).unwrap(), 2.0);
        assert!(matches!(bg.scale_at(3.5), Err(Error::Range { .. })));
        assert!(matches!(bg.scale_at(-0.1), Err(Error::Range { .. })));
        assert_eq!(bg.hubble(0.5).unwrap(), 1.0 / 1.5);
        assert!(Background::tabulated(vec![0.0, 1.0], vec![2.0, 1.0]).is_err());
        assert!(Background::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn displacement_examples() {
        assert_eq!(
            comoving_displacement(&Background::Static, 2.0, 0.0, 0.5).unwrap(),
            1.0
        );
        let lin = Background::power_law(1.0, 1.0).unwrap();
        assert_eq!(comoving_displacement(&lin, 0.0, 0.0, 1.0).unwrap(), 0.0);
        // trapezoid: 1 * 1/2 * (1/4 + 1) = 0.625
        assert_eq!(comoving_displacement(&lin, 1.0, 0.0, 1.0).unwrap(), 0.625);
        assert!(lin.drift(1.0, 1.0).is_err());
    }

    #[test]
    fn trapezoid_converges_to_exact_integral() {
        // a = 1 + t: integral_0^1 ds/(1+s)^2 = 1/2; composite trapezoid with
        // the a(t_n) prefactor folded per sub-step must converge at O(dt^2).
        let lin = Background::power_law(1.0, 1.0).unwrap();
        let mut prev_err = f64::INFINITY;
        for n in [4usize, 8, 16, 32, 64] {
            let dt = 1.0 / n as f64;
            let mut total = 0.0;
            for k in 0..n {
                let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
                // drift is a(t0)*int; divide by a(t0) to get the bare integral
                total += lin.drift(t0, t1).unwrap() / lin.scale_at(t0).unwrap();
            }
            let err = (total - 0.5).abs();
            assert!(err < prev_err / 3.5, "n={n}: err {err} vs prev {prev_err}");
            prev_err = err;
        }
        assert!(prev_err < 1e-4);
    }

    #[test]
    fn exact_inverse_square_integrals() {
        let lin = Background::power_law(1.0, 1.0).unwrap();
        assert!((lin.inverse_square_integral(0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let half = Background::power_law(0.5, 2.0).unwrap();
        // a^2 = 1 + t/2: integral = 2 ln(1 + t/2)
        assert!((half.inverse_square_integral(0.0, 2.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(
            Background::Static
                .inverse_square_integral(0.0, 0.75)
                .unwrap(),
            0.75
        );
        let tab = Background::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 2.0]).unwrap();
        // segment 1: a = 1 + s -> 1/2 ; segment 2: a = 2 -> 1/4
        assert!((tab.inverse_square_integral(0.0, 2.0).unwrap() - 0.75).abs() < 1e-15);
        // brute-force midpoint quadrature as an independent check
        let bg = Background::power_law(2.0 / 3.0, 0.3).unwrap();
        let n = 200_000;
        let dt = 1.5 / n as f64;
        let quad: f64 = (0..n)
            .map(|k| {
                let a = bg.scale_at((k as f64 + 0.5) * dt).unwrap();
                dt / (a * a)
            })
            .sum();
        assert!((bg.inverse_square_integral(0.0, 1.5).unwrap() - quad).abs() < 1e-9);
    }

    #[test]
    fn static_drift_factor_is_exactly_one() {
        assert_eq!(Background::Static.drift_factor(0.3, 0.7).unwrap(), 1.0);
        assert_eq!(Background::Static.decay_ratio(0.3, 0.7).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn scale_is_positive_and_monotone(p in 0.0f64..3.0, t0 in 0.01f64..10.0,
                                          t1 in 0.0f64..100.0, dt in 0.0f64..100.0) {
            let bg = Background::power_law(p, t0).unwrap();
            let a1 = bg.scale_at(t1).unwrap();
            let a2 = bg.scale_at(t1 + dt).unwrap();
            prop_assert!(a1 > 0.0);
            prop_assert!(a2 >= a1);
        }

        #[test]
        fn tabulated_monotone(incs in proptest::collection::vec(0.0f64..1.0, 2..8),
                              q1 in 0.0f64..1.0, q2 in 0.0f64..1.0) {
            let n = incs.len();
            let times: Vec<f64> = (0..n).map(|k| k as f64).collect();
            let mut values = Vec::with_capacity(n);
            let mut a = 1.0;
            for inc in &incs { values.push(a); a += inc; }
            let bg = Background::tabulated(times, values).unwrap();
            let t_max = (n - 1) as f64;
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            prop_assert!(bg.scale_at(hi * t_max).unwrap() >= bg.scale_at(lo * t_max).unwrap());
        }

        #[test]
        fn displacement_linear_in_velocity(u in -10.0f64..10.0, k in -5.0f64..5.0,
                                           t in 0.0f64..5.0, dt in 1e-3f64..1.0) {
            let bg = Background::power_law(0.5, 0.7).unwrap();
            let d1 = bg.comoving_displacement(u, t, t + dt).unwrap();
            let dk = bg.comoving_displacement(k * u, t, t + dt).unwrap();
            prop_assert!((dk - k * d1).abs() <= 1e-12 * (1.0 + dk.abs()));
            let st = Background::Static.comoving_displacement(u, t, t + dt).unwrap();
            prop_assert_eq!(st, u * ((t + dt) - t));
        }
    }
}

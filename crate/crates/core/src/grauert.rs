//! The Grauert metric `(1 + |w|^2 u(|w|^2)^2) |dw|^2` on C*, the profile
//! `u(t) = (t - 1) / (t log t)`, the densities `h_k` and their curvatures.
//!
//! Internally everything is expressed through the dimensionless profile
//! quantities `v = t u^2`, `x = t u'/u` and `y = t^2 u''/u`, which stay
//! O(1)-scaled over the whole clamp range. Raw `u'`, `u''` overflow long
//! before `t = 1e-280`.

use num_complex::Complex64;

use crate::curvature::gaussian_conformal;
use crate::error::{Error, Result};

pub const T_MIN: f64 = 1e-280;
pub const T_MAX: f64 = 1e280;
/// `|t - 1|` below which the Taylor branch is used.
pub const SERIES_RADIUS: f64 = 1e-3;

/// Taylor coefficients of `u(1 + s)` in `s`.
const U_SERIES: [f64; 9] = [
    1.0,
    -1.0 / 2.0,
    5.0 / 12.0,
    -3.0 / 8.0,
    251.0 / 720.0,
    -95.0 / 288.0,
    19087.0 / 60480.0,
    -5257.0 / 17280.0,
    1070017.0 / 3628800.0,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UJet {
    pub t: f64,
    pub u: f64,
    pub up: f64,
    pub upp: f64,
}

/// Scale-free description of `u` at `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub t: f64,
    pub u: f64,
    /// `t u^2`
    pub v: f64,
    /// `t u' / u`
    pub x: f64,
    /// `t^2 u'' / u`
    pub y: f64,
    /// `x - x^2 + y`, which equals `1/l^2 - 1/(4 sinh^2(l/2))` with `l = log t`.
    pub b: f64,
}

/// Density `h` with its Wirtinger jet at `z`. `dbar == conj(d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityJet {
    pub z: Complex64,
    pub h: f64,
    pub d: Complex64,
    pub dbar: Complex64,
    pub ddbar: f64,
}

impl DensityJet {
    fn checked(self) -> Result<Self> {
        let ok = self.h.is_finite()
            && self.d.re.is_finite()
            && self.d.im.is_finite()
            && self.ddbar.is_finite();
        if ok {
            Ok(self)
        } else {
            Err(Error::NonFinite(format!("density jet at {}", self.z)))
        }
    }
}

fn check_domain(t: f64) -> Result<()> {
    if t.is_nan() {
        return Err(Error::Invalid("t is NaN".into()));
    }
    if t < T_MIN {
        return Err(Error::DomainUnderflow(t));
    }
    if t > T_MAX {
        return Err(Error::DomainOverflow(t));
    }
    Ok(())
}

pub fn profile(t: f64) -> Result<Profile> {
    check_domain(t)?;
    if (t - 1.0).abs() < SERIES_RADIUS {
        Ok(profile_series(t))
    } else {
        Ok(profile_closed(t))
    }
}

pub(crate) fn profile_series(t: f64) -> Profile {
    let s = t - 1.0;
    let mut u = 0.0;
    let mut up = 0.0;
    let mut upp = 0.0;
    for (n, &a) in U_SERIES.iter().enumerate().rev() {
        let n = n as f64;
        u = u * s + a;
        if n >= 1.0 {
            up = up * s + n * a;
        }
        if n >= 2.0 {
            upp = upp * s + n * (n - 1.0) * a;
        }
    }
    Profile {
        t,
        u,
        v: t * u * u,
        x: t * up / u,
        y: t * t * upp / u,
        b: b_of_log(s.ln_1p()),
    }
}

pub(crate) fn profile_closed(t: f64) -> Profile {
    let s = t - 1.0;
    let l = if s.abs() < 0.5 { s.ln_1p() } else { t.ln() };
    // d = log t - s cancels badly near t = 1, where the log series gives it.
    let d = if s.abs() < 0.25 {
        let mut e = 0.0;
        let mut pow = s * s;
        for n in 3..200 {
            pow *= s;
            let term = if n % 2 == 1 {
                pow / n as f64
            } else {
                -pow / n as f64
            };
            e += term;
            if term.abs() <= 1e-18 * e.abs() {
                break;
            }
        }
        e - 0.5 * s * s
    } else {
        l - s
    };
    let r = d / s;
    let u = (s / t) / l;
    let x = r / l;
    let b = b_of_log(l);
    // u' < 0, so x < 0 and y = b + x (x - 1) adds non-negative terms.
    Profile {
        t,
        u,
        v: (s / t) * (s / l) / l,
        x,
        y: b + x * (x - 1.0),
        b,
    }
}

/// `(sigma - l)(sigma + l) / (l sigma)^2` with `sigma = 2 sinh(l/2)`; the
/// difference `sigma - l` comes from its odd series when `|l| < 2`.
fn b_of_log(l: f64) -> f64 {
    if l == 0.0 {
        return 1.0 / 12.0;
    }
    let h = 0.5 * l;
    let sigma = 2.0 * h.sinh();
    let sigma_minus_l = if l.abs() < 2.0 {
        let h2 = h * h;
        let mut term = h * h2 / 6.0;
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= h2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
            k += 1.0;
        }
        2.0 * sum
    } else {
        sigma - l
    };
    ((sigma_minus_l / l) * ((sigma + l) / sigma)) / (l * sigma)
}

impl Profile {
    fn a_term(&self) -> f64 {
        1.0 + 6.0 * self.x + 2.0 * self.x * self.x + 2.0 * self.y
    }

    fn b_term(&self) -> f64 {
        self.b
    }
}

/// `u`, `u'`, `u''` at `t`.
pub fn u_jet(t: f64) -> Result<UJet> {
    let p = profile(t)?;
    let up = p.x * p.u / t;
    let upp = (p.y * p.u / t) / t;
    if !up.is_finite() {
        return Err(Error::DerivativeOverflow { what: "u'(t)", t });
    }
    if !upp.is_finite() {
        return Err(Error::DerivativeOverflow { what: "u''(t)", t });
    }
    Ok(UJet { t, u: p.u, up, upp })
}

/// `M(t) = u^2 + 6t u u' + 2t^2 u'^2 + 2t^2 u u'' + 2t^2 u^3 u' - 2t^3 u^2 u'^2 + 2t^3 u^3 u''`.
pub fn m_eval(t: f64) -> Result<f64> {
    let p = profile(t)?;
    let m = p.u * p.u * (p.a_term() + 2.0 * p.v * p.b_term());
    if !m.is_finite() {
        return Err(Error::DerivativeOverflow { what: "M(t)", t });
    }
    Ok(m)
}

/// Gaussian curvature of the Grauert metric as a function of `t = |z|^2`,
/// `-2 M(t) / (1 + t u^2)^3`, evaluated without forming `M` or the cube.
pub fn kg_of_t(t: f64) -> Result<f64> {
    let p = profile(t)?;
    let one_v = 1.0 + p.v;
    let w = p.v / one_v;
    let first = ((w * p.a_term() / one_v) / one_v) / t;
    let second = 2.0 * ((p.b_term() * w) * w / one_v) / t;
    Ok(-2.0 * (first + second))
}

/// Gaussian curvature of the Grauert metric at `z != 0`.
pub fn kg(z: Complex64) -> Result<f64> {
    nonzero(z)?;
    kg_of_t(z.norm_sqr())
}

/// Curvature of `h_k |dz|^2`, from the `h_k` jet through the conformal formula.
pub fn kk(k: u32, z: Complex64) -> Result<f64> {
    gaussian_conformal(&hk_density_jet(k, z)?)
}

fn nonzero(z: Complex64) -> Result<()> {
    if z.norm_sqr() == 0.0 {
        return Err(Error::Invalid("point must be nonzero in C*".into()));
    }
    Ok(())
}

/// `h(w) = 1 + |w|^2 u^2(|w|^2)` with its Wirtinger jet, by the chain rule
/// through `t = |w|^2`.
pub fn grauert_density_jet(w: Complex64) -> Result<DensityJet> {
    nonzero(w)?;
    let p = profile(w.norm_sqr())?;
    // dh/dt = u^2 + 2 t u u' = u^2 (1 + 2x), and dh = conj(w) dh/dt
    let d = p.v * (1.0 + 2.0 * p.x) / w;
    DensityJet {
        z: w,
        h: 1.0 + p.v,
        d,
        dbar: d.conj(),
        ddbar: p.u * p.u * p.a_term(),
    }
    .checked()
}

/// `h_k(z) = k^2 |z|^{2(k-1)} (1 + |z|^{2k} u^2(|z|^{2k}))` with its
/// Wirtinger jet.
pub fn hk_density_jet(k: u32, z: Complex64) -> Result<DensityJet> {
    if k == 0 {
        return Err(Error::Invalid("k must be >= 1".into()));
    }
    nonzero(z)?;
    let r = z.norm_sqr();
    let p = profile(r.powi(k as i32))?;
    let kf = k as f64;
    let scale = kf * kf * r.powi(k as i32 - 1);
    let q = (kf - 1.0) + (2.0 * kf - 1.0) * p.v + 2.0 * kf * p.v * p.x;
    let big_p = (kf - 1.0).powi(2)
        + (2.0 * kf - 1.0).powi(2) * p.v
        + 2.0 * kf * (5.0 * kf - 2.0) * p.v * p.x
        + 2.0 * kf * kf * p.v * (p.x * p.x + p.y);
    let d = scale * q / z;
    DensityJet {
        z,
        h: scale * (1.0 + p.v),
        d,
        dbar: d.conj(),
        ddbar: scale * big_p / r,
    }
    .checked()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::holo::{default_step, wirtinger_fd};
    use std::f64::consts::{E, PI};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn u_at_named_points() {
        assert!(rel(u_jet(E).unwrap().u, (E - 1.0) / E) < 1e-15);
        assert!(rel(u_jet(4.0).unwrap().u, 3.0 / (4.0 * 4f64.ln())) < 1e-15);
        let one = u_jet(1.0).unwrap();
        assert_eq!(one.u, 1.0);
        assert_eq!(one.up, -0.5);
        assert!(rel(one.upp, 5.0 / 6.0) < 1e-15);
    }

    #[test]
    fn closed_form_derivatives_match_direct_formulas() {
        // u' = (log t + 1 - t)/(t^2 log^2 t) away from the seam
        for &t in &[0.01, 0.3, 2.5, 40.0, 1e6] {
            let j = u_jet(t).unwrap();
            let l = f64::ln(t);
            let up = (l + 1.0 - t) / (t * t * l * l);
            let upp = ((1.0 - t) * l - 2.0 * (l + 1.0 - t) * (l + 1.0)) / (t * t * t * l * l * l);
            assert!(rel(j.up, up) < 1e-12, "t={t}");
            assert!(rel(j.upp, upp) < 1e-11, "t={t}");
        }
    }

    #[test]
    fn branches_agree_at_the_seam() {
        for &t in &[
            1.0 + SERIES_RADIUS,
            1.0 - SERIES_RADIUS,
            1.0 + 2e-3,
            1.0 - 5e-4,
        ] {
            let a = profile_series(t);
            let b = profile_closed(t);
            let ua = (a.u, a.x * a.u / t, a.y * a.u / (t * t));
            let ub = (b.u, b.x * b.u / t, b.y * b.u / (t * t));
            assert!(rel(ua.0, ub.0) < 1e-9, "u at {t}");
            assert!(rel(ua.1, ub.1) < 1e-9, "u' at {t}");
            assert!(rel(ua.2, ub.2) < 1e-9, "u'' at {t}");
            assert!(rel(a.b, b.b) < 1e-12, "B at {t}");
        }
    }

    #[test]
    fn domain_clamp() {
        assert_eq!(u_jet(1e-281), Err(Error::DomainUnderflow(1e-281)));
        assert_eq!(u_jet(1e281), Err(Error::DomainOverflow(1e281)));
        assert!(profile(1e-280).unwrap().u.is_finite());
        assert!(profile(1e280).unwrap().u > 0.0);
        // raw derivatives are not representable this close to 0
        assert!(matches!(
            u_jet(1e-280),
            Err(Error::DerivativeOverflow { .. })
        ));
        // but the curvature is
        assert!((kg_of_t(1e-280).unwrap() + 4.0).abs() < 1e-10);
        assert!(kg_of_t(1e280).unwrap().abs() < 1e-200);
    }

    #[test]
    fn m_and_kg_at_one() {
        assert!(rel(m_eval(1.0).unwrap(), 1.0 / 3.0) < 1e-14);
        assert!(rel(kg(Complex64::new(1.0, 0.0)).unwrap(), -1.0 / 12.0) < 1e-14);
    }

    // High-precision oracle: K = -Laplacian(log h)/(2h) evaluated with
    // 60-digit arithmetic and numerical differentiation of log h.
    const KG_ORACLE: [(f64, f64); 14] = [
        (1e-10, -4.0000000000000820545),
        (1e-8, -4.0000000003278994885),
        (1e-6, -4.0000009939727681081),
        (1e-4, -4.0017892276096755686),
        (1e-3, -4.0509810966068039133),
        (1e-2, -4.7611430572643826307),
        (0.1, -3.9476540418158126466),
        (0.5, -0.34764340865182140033),
        (1.6487212707001282, -0.031498841635544704991),
        (10.0, -0.00039476540418158126466),
        (100.0, -4.7611430572643826307e-8),
        (1e4, -4.0017892276096755686e-16),
        (1e6, -4.0000009939727681081e-24),
        (1e10, -4.0000000000000820545e-40),
    ];

    #[test]
    fn kg_matches_high_precision_oracle() {
        for (r, want) in KG_ORACLE {
            let got = kg(Complex64::new(r, 0.0)).unwrap();
            assert!(rel(got, want) < 1e-9, "r={r}: {got} vs {want}");
        }
    }

    #[test]
    fn kg_limits() {
        assert!((kg(Complex64::new(1e-10, 0.0)).unwrap() + 4.0).abs() < 0.2);
        assert!(kg(Complex64::new(1e10, 0.0)).unwrap().abs() < 0.2);
    }

    #[test]
    fn kg_nonpositive_and_rotation_invariant() {
        for i in 0..=240 {
            let r = 10f64.powf(-12.0 + 24.0 * i as f64 / 240.0);
            let base = kg(Complex64::new(r, 0.0)).unwrap();
            for a in 0..96 {
                let z = Complex64::from_polar(r, 2.0 * PI * a as f64 / 96.0);
                let k = kg(z).unwrap();
                assert!(k <= 1e-10);
                assert!((k - base).abs() <= 1e-10 * base.abs().max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn m_at_e_recovered_from_stencil_curvature() {
        let w = Complex64::new(E.sqrt(), 0.0);
        let h = |z: Complex64| grauert_density_jet(z).unwrap().h;
        let fd = wirtinger_fd(h, w, default_step(w)).unwrap();
        let k_fd = -2.0 * (fd.value * fd.ddbar - fd.d.norm_sqr()) / fd.value.powi(3);
        let m_fd = -k_fd * fd.value.powi(3) / 2.0;
        assert!(rel(m_eval(E).unwrap(), m_fd) < 1e-4);
    }

    #[test]
    fn density_special_values() {
        let j = grauert_density_jet(Complex64::new(E.sqrt(), 0.0)).unwrap();
        assert!(rel(j.h, 1.0 + (E - 1.0).powi(2) / E) < 1e-15);
        assert_eq!(
            grauert_density_jet(Complex64::new(0.0, 1.0)).unwrap().h,
            2.0
        );
        let h2 = hk_density_jet(2, Complex64::from_polar(1.0, 0.7)).unwrap();
        assert!(rel(h2.h, 8.0) < 1e-14);
    }

    #[test]
    fn hk_with_k_one_is_the_grauert_density() {
        for &z in &[
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.2, 1.3),
            Complex64::new(1e-5, 3e-6),
            Complex64::new(40.0, -7.0),
            Complex64::new(1.0, 0.0),
        ] {
            let a = grauert_density_jet(z).unwrap();
            let b = hk_density_jet(1, z).unwrap();
            assert!(rel(b.h, a.h) < 1e-14);
            assert!((b.d - a.d).norm() <= 1e-14 * a.d.norm());
            assert!(rel(b.ddbar, a.ddbar) < 1e-13);
        }
    }

    #[test]
    fn density_jets_match_stencil_oracle() {
        let pts = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.3, -0.8),
            Complex64::new(1.7, 0.9),
            Complex64::new(-2.2, 0.4),
        ];
        for k in 1..=3u32 {
            for &z in &pts {
                let exact = hk_density_jet(k, z).unwrap();
                let fd =
                    wirtinger_fd(|t| hk_density_jet(k, t).unwrap().h, z, default_step(z)).unwrap();
                assert!(rel(fd.value, exact.h) < 1e-14);
                assert!(
                    (fd.d - exact.d).norm() <= 1e-5 * exact.d.norm(),
                    "k={k} z={z}"
                );
                assert!(rel(fd.ddbar, exact.ddbar) < 1e-5, "k={k} z={z}");
            }
        }
    }

    #[test]
    fn kk_is_kg_of_power() {
        let z = Complex64::from_polar(0.7, PI / 5.0);
        assert!(rel(kk(3, z).unwrap(), kg(z.powi(3)).unwrap()) < 1e-8);
        let w = Complex64::new(0.3, 1.1);
        assert!(rel(kk(1, w).unwrap(), kg(w).unwrap()) < 1e-12);
        assert!((kk(2, Complex64::new(1e-5, 0.0)).unwrap() + 4.0).abs() < 0.2);
    }

    #[test]
    fn hk_blows_up_and_ratios_vanish() {
        for k in 1..=3u32 {
            let mut prev = 0.0;
            for i in 0..40 {
                let r = 0.1 * 10f64.powf(-(i as f64) / 5.0);
                let h = hk_density_jet(k, Complex64::new(r, 0.0)).unwrap().h;
                assert!(h > prev, "k={k} r={r}");
                prev = h;
            }
            let j = hk_density_jet(k, Complex64::new(1e-8, 0.0)).unwrap();
            let h3 = j.h.powi(3);
            assert!(j.d.norm() / h3 < 1e-6);
            assert!(j.dbar.norm() / h3 < 1e-6);
            assert!(j.ddbar.abs() / h3 < 1e-6);
        }
    }

    #[test]
    fn second_derivative_ratio_at_large_t() {
        // t^2 u''/u from a 40-digit evaluation
        let cases = [
            (1e4, 0.131_928_345_704_479_756_979_786_227_918_3),
            (1e8, 0.060_180_904_683_782_998_129_021_165_518_2),
            (1e12, 0.038_810_813_726_137_685_574_218_695_970_1),
        ];
        for (t, y) in cases {
            assert!(rel(profile(t).unwrap().y, y) < 1e-13, "t = {t:e}");
        }
    }
}

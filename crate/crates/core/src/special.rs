//! Dimensional constants and kernels of the logarithmic Laplacian.
//!
//! ```text
//! c_N   = π^(-N/2) Γ(N/2)
//! ρ_N   = 2 ln 2 + ψ(N/2) − γ
//! d_N   = 2 ω_{N−1} / (N² (2π)^N)
//! ```

use crate::error::{Error, Result};
use crate::scalar::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// B_{2k} / (2k), k = 1..7
const DIGAMMA_ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Euler–Mascheroni constant γ = −Γ'(1).
pub fn euler_gamma<T: Real>() -> T {
    T::lit(EULER_GAMMA)
}

/// Gamma function (Lanczos approximation, reflection below 1/2).
pub fn gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::of(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    (T::lit(2.0) * T::PI()).sqrt() * t.powf(x + half) * (-t).exp() * acc
}

/// Γ(N/2) for integer `N ≥ 1`, by exact recurrence from Γ(1) and Γ(1/2).
pub fn gamma_half_integer<T: Real>(n: usize) -> T {
    let (mut value, mut arg) = if n % 2 == 0 {
        (T::one(), T::one())
    } else {
        (T::PI().sqrt(), T::lit(0.5))
    };
    let target = T::of(n) / T::lit(2.0);
    while arg < target {
        value *= arg;
        arg += T::one();
    }
    value
}

/// Digamma ψ = Γ'/Γ on the positive half line.
///
/// Shifts the argument above 6 with ψ(x+1) = ψ(x) + 1/x and sums the
/// asymptotic series there.
pub fn digamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let six = T::lit(6.0);
    let mut x = x;
    let mut acc = T::zero();
    while x < six {
        acc -= T::one() / x;
        x += T::one();
    }
    let inv2 = T::one() / (x * x);
    let mut series = T::zero();
    let mut pow = inv2;
    for &c in DIGAMMA_ASYMPTOTIC.iter() {
        series += T::lit(c) * pow;
        pow *= inv2;
    }
    Ok(acc + x.ln() - T::lit(0.5) / x - series)
}

fn check_dim(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("spatial dimension must be at least 1".into()));
    }
    Ok(())
}

/// Kernel normalization `c_N = π^{-N/2} Γ(N/2)`.
pub fn c_of_n<T: Real>(n: usize) -> Result<T> {
    check_dim(n)?;
    Ok(T::PI().powf(-T::of(n) / T::lit(2.0)) * gamma_half_integer::<T>(n))
}

/// Zero-order constant `ρ_N = 2 ln 2 + ψ(N/2) − γ`.
pub fn rho_of_n<T: Real>(n: usize) -> Result<T> {
    check_dim(n)?;
    let two = T::lit(2.0);
    Ok(two * two.ln() + digamma(T::of(n) / two)? - euler_gamma::<T>())
}

/// Surface measure of the unit sphere `S^{N-1}`: `ω_{N−1} = 2π^{N/2}/Γ(N/2)`.
/// For `N = 1` this is the two-point measure, `ω_0 = 2`.
pub fn sphere_measure<T: Real>(n: usize) -> Result<T> {
    check_dim(n)?;
    let two = T::lit(2.0);
    Ok(two * T::PI().powf(T::of(n) / two) / gamma_half_integer::<T>(n))
}

/// Lower-bound constant `d_N = 2 ω_{N−1} / (N² (2π)^N)`.
pub fn d_of_n<T: Real>(n: usize) -> Result<T> {
    let omega = sphere_measure::<T>(n)?;
    let nn = T::of(n);
    let two_pi = T::lit(2.0) * T::PI();
    Ok(T::lit(2.0) * omega / (nn * nn * two_pi.powi(n as i32)))
}

/// Normalization of the fractional Laplacian,
/// `c(N,s) = 2^{2s} π^{-N/2} s Γ((N+2s)/2) / Γ(1−s)`.
pub fn fractional_constant<T: Real>(n: usize, s: T) -> Result<T> {
    check_dim(n)?;
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::Domain(format!("fractional order must lie in (0,1), got {s}")));
    }
    let two = T::lit(2.0);
    let nn = T::of(n);
    Ok(two.powf(two * s) * T::PI().powf(-nn / two) * s * gamma((nn + two * s) / two)
        / gamma(T::one() - s))
}

/// Split of `|z|^{-N}` into the near kernel `k` (|z| ≤ 1) and the far kernel
/// `j` (|z| > 1). The unit sphere belongs to `k`.
pub fn kernel_values<T: Real>(z: &[T]) -> Result<(T, T)> {
    check_dim(z.len())?;
    let r = z.iter().map(|&c| c * c).sum::<T>().sqrt();
    if r == T::zero() {
        return Err(Error::Domain("kernel undefined at the origin".into()));
    }
    let v = r.powi(-(z.len() as i32));
    Ok(if r <= T::one() { (v, T::zero()) } else { (T::zero(), v) })
}

/// The bundle of constants for one spatial dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionalConstants<T> {
    pub dim: usize,
    pub c_n: T,
    pub rho_n: T,
    pub gamma: T,
    pub d_n: T,
}

impl<T: Real> DimensionalConstants<T> {
    pub fn new(dim: usize) -> Result<Self> {
        Ok(Self {
            dim,
            c_n: c_of_n(dim)?,
            rho_n: rho_of_n(dim)?,
            gamma: euler_gamma(),
            d_n: d_of_n(dim)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    const G: f64 = EULER_GAMMA;

    #[test]
    fn euler_gamma_value() {
        let g: f64 = euler_gamma();
        assert!((g - 0.577_215_664_901_532).abs() < 1e-15);
        assert!(g > 0.5 && g < 0.6);
        assert!((digamma(1.0).unwrap() + g).abs() < 1e-12);
    }

    #[test]
    fn digamma_reference_points() {
        assert!((digamma(0.5f64).unwrap() - (-G - 2.0 * LN_2)).abs() < 1e-12);
        assert!((digamma(1.0f64).unwrap() + G).abs() < 1e-12);
        assert!((digamma(2.0f64).unwrap() - (1.0 - G)).abs() < 1e-12);
        // recurrence across the shift threshold
        for &x in &[0.1f64, 0.7, 3.3, 5.9, 6.0, 11.25] {
            let l = digamma(x + 1.0).unwrap();
            let r = digamma(x).unwrap() + 1.0 / x;
            assert!((l - r).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn digamma_matches_log_gamma_derivative() {
        for &x in &[0.3f64, 1.7, 4.2, 9.5] {
            let h = 1e-5;
            let fd = (gamma(x + h).ln() - gamma(x - h).ln()) / (2.0 * h);
            assert!((fd - digamma(x).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn digamma_domain() {
        assert!(digamma(0.0f64).is_err());
        assert!(digamma(-1.5f64).is_err());
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(0.5f64) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0f64) - 24.0).abs() < 1e-11);
        assert!((gamma(1.5f64) - PI.sqrt() / 2.0).abs() < 1e-14);
        for n in 1..12 {
            let exact: f64 = gamma_half_integer(n);
            assert!((gamma(n as f64 / 2.0) - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn c_n_values() {
        assert!((c_of_n::<f64>(1).unwrap() - 1.0).abs() < 1e-15);
        assert!((c_of_n::<f64>(2).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((c_of_n::<f64>(3).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(c_of_n::<f64>(0).is_err());
        // c_N ω_{N-1} = 2
        for n in 1..10 {
            let p = c_of_n::<f64>(n).unwrap() * sphere_measure::<f64>(n).unwrap();
            assert!((p - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rho_n_values() {
        assert!((rho_of_n::<f64>(1).unwrap() + 2.0 * G).abs() < 1e-12);
        assert!((rho_of_n::<f64>(1).unwrap() + 1.154_431).abs() < 1e-6);
        assert!((rho_of_n::<f64>(2).unwrap() - (2.0 * LN_2 - 2.0 * G)).abs() < 1e-12);
        assert!((rho_of_n::<f64>(2).unwrap() - 0.231_863).abs() < 1e-6);
        assert!((rho_of_n::<f64>(4).unwrap() - (2.0 * LN_2 + 1.0 - 2.0 * G)).abs() < 1e-12);
        let rhos: Vec<f64> = (1..=10).map(|n| rho_of_n(n).unwrap()).collect();
        assert!(rhos[0] < 0.0);
        for w in rhos.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(rhos[1..].iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn d_n_values() {
        assert!((d_of_n::<f64>(1).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((d_of_n::<f64>(2).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        for n in 1..=10 {
            assert!(c_of_n::<f64>(n).unwrap() >= d_of_n::<f64>(n).unwrap());
        }
    }

    #[test]
    fn fractional_constant_values() {
        assert!((fractional_constant::<f64>(1, 0.5).unwrap() - 1.0 / PI).abs() < 1e-14);
        // c(N,s)/s -> c_N and its log-derivative at 0 is ρ_N
        for n in 1..4 {
            let s = 1e-6;
            let ratio = fractional_constant::<f64>(n, s).unwrap() / s;
            let c = c_of_n::<f64>(n).unwrap();
            let slope = (ratio / c).ln() / s;
            assert!((slope - rho_of_n::<f64>(n).unwrap()).abs() < 1e-4);
        }
        assert!(fractional_constant::<f64>(1, 0.0).is_err());
    }

    #[test]
    fn kernels_split() {
        assert_eq!(kernel_values(&[2.0f64]).unwrap(), (0.0, 0.5));
        assert_eq!(kernel_values(&[0.5f64]).unwrap(), (2.0, 0.0));
        assert_eq!(kernel_values(&[-1.0f64]).unwrap(), (1.0, 0.0));
        assert!(kernel_values(&[0.0f64, 0.0]).is_err());
        let (k, j) = kernel_values(&[0.6f64, 0.8]).unwrap();
        assert_eq!(j, 0.0);
        assert!((k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_precision_constants() {
        assert!((rho_of_n::<f32>(1).unwrap() + 2.0 * G as f32).abs() < 1e-5);
        assert!((c_of_n::<f32>(2).unwrap() - 1.0 / std::f32::consts::PI).abs() < 1e-7);
    }
}

#![allow(clippy::excessive_precision)] // published special-function coefficients kept verbatim

//! Stable scalar primitives for the probit loss.
//!
//! The loss needs `log Phi(t)` far into the left tail where `Phi`
//! underflows, and the inverse Mills ratio `phi(t)/Phi(t)` which suffers
//! catastrophic cancellation if computed naively. Both are routed through
//! the scaled complementary error function `erfcx(x) = exp(x^2) erfc(x)`,
//! evaluated with the rational Chebyshev approximations of W. J. Cody
//! (SPECFUN), accurate to a few ulp over the whole real line.

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const LN_2: f64 = std::f64::consts::LN_2;
/// 1/sqrt(pi)
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_9;
/// sqrt(2/pi)
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_355_9;
/// 1/sqrt(2*pi)
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_9;

// Cody's rational coefficients (SPECFUN CALERF).
const A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_47e3,
    1.857_777_061_846_031_53e-1,
];
const B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];
const C: [f64; 9] = [
    5.641_884_969_886_700_89e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
    2.153_115_354_744_038_46e-8,
];
const D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];
const P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];

const THRESH: f64 = 0.46875;
/// erfcx(-x) overflows f64 below this argument.
const XNEG: f64 = -26.628;
/// Above this, erfcx(x) = 1/(x*sqrt(pi)) to full precision.
const XHUGE: f64 = 6.71e7;

/// `exp(-y^2)` with the exponent split at 1/16 granularity so the dominant
/// part of the argument is exact (Cody's trick for accurate tail scaling).
#[inline]
fn exp_neg_y_squared(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Scaled complementary error function `erfcx(x) = exp(x^2) erfc(x)`.
///
/// Finite and accurate for all `x >= XNEG`; returns `+inf` below that,
/// where the true value exceeds the f64 range.
pub fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= THRESH {
        // erfcx = exp(y^2) * (1 - erf(y)); the exponential is benign here.
        let ysq = y * y;
        let mut xnum = A[4] * ysq;
        let mut xden = ysq;
        for i in 0..3 {
            xnum = (xnum + A[i]) * ysq;
            xden = (xden + B[i]) * ysq;
        }
        let erf = x * (xnum + A[3]) / (xden + B[3]);
        return ysq.exp() * (1.0 - erf);
    } else if y <= 4.0 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        (xnum + C[7]) / (xden + D[7])
    } else if y < XHUGE {
        let ysq = 1.0 / (y * y);
        let mut xnum = P[5] * ysq;
        let mut xden = ysq;
        for i in 0..4 {
            xnum = (xnum + P[i]) * ysq;
            xden = (xden + Q[i]) * ysq;
        }
        let r = ysq * (xnum + P[4]) / (xden + Q[4]);
        (FRAC_1_SQRT_PI - r) / y
    } else {
        FRAC_1_SQRT_PI / y
    };
    if x < 0.0 {
        if x < XNEG {
            return f64::INFINITY;
        }
        // erfcx(-y) = 2 exp(y^2) - erfcx(y), with the split-exp trick.
        let ysq = (y * 16.0).trunc() / 16.0;
        let del = (y - ysq) * (y + ysq);
        let e = (ysq * ysq).exp() * del.exp();
        (e + e) - result
    } else {
        result
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESH {
        let ysq = y * y;
        let mut xnum = A[4] * ysq;
        let mut xden = ysq;
        for i in 0..3 {
            xnum = (xnum + A[i]) * ysq;
            xden = (xden + B[i]) * ysq;
        }
        return 1.0 - x * (xnum + A[3]) / (xden + B[3]);
    }
    let scaled = erfcx(y);
    let tail = scaled * exp_neg_y_squared(y);
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Standard normal CDF.
pub fn norm_cdf(t: f64) -> f64 {
    0.5 * erfc(-t * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(t: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * t * t).exp()
}

/// `log Phi(t)`, accurate over the whole real line.
///
/// For `t >= -1` the complementary tail is small enough that
/// `ln(1 - Phi(-t))` is exact via `ln_1p`; below that the identity
/// `log Phi(t) = log(erfcx(-t/sqrt(2))/2) - t^2/2` avoids the underflow of
/// `Phi`. The two branches agree to about 1e-15 at the switch point.
pub fn log_norm_cdf(t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::Domain("log_norm_cdf of NaN".into()));
    }
    if t < -1.0 {
        Ok(erfcx(-t * FRAC_1_SQRT_2).ln() - LN_2 - 0.5 * t * t)
    } else {
        let upper_tail = 0.5 * erfc(t * FRAC_1_SQRT_2);
        Ok((-upper_tail).ln_1p())
    }
}

/// Inverse Mills ratio `lambda(t) = phi(t)/Phi(t)`.
///
/// Monotone decreasing; behaves like `-t` as `t -> -inf` and decays to 0
/// on the right, underflowing gracefully to subnormals/zero near `t = 38`
/// without producing NaN or infinity.
pub fn inverse_mills(t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::Domain("inverse_mills of NaN".into()));
    }
    if t <= 30.0 {
        // lambda(t) = sqrt(2/pi) / erfcx(-t/sqrt(2)); the erfcx argument
        // stays above XNEG for t <= 30, so no overflow.
        Ok(SQRT_2_OVER_PI / erfcx(-t * FRAC_1_SQRT_2))
    } else {
        // Phi(t) is 1 to within 5e-198 here; dividing by it is a no-op.
        Ok(norm_pdf(t))
    }
}

/// Second derivative of `-log Phi` at `t`:
/// `h(t) = lambda(t) * (t + lambda(t))`, nonnegative for all `t`.
///
/// Far into the left tail `t + lambda(t)` cancels catastrophically
/// (lambda(t) ~ -t there), so below -1000 the asymptotic expansion
/// `1 - t^-2 + 6 t^-4` takes over; its truncation error is O(t^-6).
pub fn curvature(t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::Domain("curvature of NaN".into()));
    }
    if t <= -1e3 {
        let inv_sq = 1.0 / (t * t);
        return Ok(1.0 - inv_sq + 6.0 * inv_sq * inv_sq);
    }
    let lambda = inverse_mills(t)?;
    Ok((lambda * (t + lambda)).max(0.0))
}

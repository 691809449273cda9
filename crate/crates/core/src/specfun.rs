//! Error function family in double precision.
//!
//! Rational Chebyshev approximations after W. J. Cody (1969), split into the
//! usual three intervals `|x| <= 0.46875`, `0.46875 < |x| <= 4` and `|x| > 4`.
//! `erfcx` is evaluated directly in the outer intervals so that products like
//! `exp(a) * erfc(b)` with `a ~ b^2 ~ 100` never form the overflowing factors.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_95;
const SMALL: f64 = 0.468_75;
const ERFC_UNDERFLOW: f64 = 26.543;
/// Below this, `exp(x^2)` overflows and so does `erfcx(x) ~ 2 exp(x^2)`.
pub const ERFCX_OVERFLOW: f64 = -26.628_735_713_751_4;

const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302_02,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
const C: [f64; 9] = [
    0.564_188_496_988_670_09,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_13,
    881.952_221_241_769_1,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const P: [f64; 6] = [
    0.305_326_634_961_232_34,
    0.360_344_899_949_804_44,
    0.125_781_726_111_229_25,
    0.016_083_785_148_742_277,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_098,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_4,
    1.872_952_849_923_460_5,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_9,
];

/// `erf(x) / x` for `|x| <= 0.46875`, as a function of `z = x^2`.
#[inline]
fn ratio_small(z: f64) -> f64 {
    let num = (((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3];
    let den = (((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3];
    num / den
}

/// `erfcx(y)` for `0.46875 < y <= 4`.
#[inline]
fn scaled_mid(y: f64) -> f64 {
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    (num + C[7]) / (den + D[7])
}

/// `erfcx(y)` for `y > 4` (asymptotic rational form in `1/y^2`).
#[inline]
fn scaled_tail(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    (FRAC_1_SQRT_PI - r) / y
}

#[inline]
fn scaled_outer(y: f64) -> f64 {
    if y <= 4.0 {
        scaled_mid(y)
    } else {
        scaled_tail(y)
    }
}

/// `exp(-y^2)` with the square split as `y~^2 + (y - y~)(y + y~)` so the
/// rounding error of `y*y` is not amplified by the exponential.
#[inline]
fn exp_neg_square(y: f64) -> f64 {
    let yt = (y * 16.0).trunc() / 16.0;
    (-yt * yt).exp() * (-(y - yt) * (y + yt)).exp()
}

#[inline]
fn exp_pos_square(y: f64) -> f64 {
    let yt = (y * 16.0).trunc() / 16.0;
    (yt * yt).exp() * ((y - yt) * (y + yt)).exp()
}

/// `erfc(|x|)` for `|x| > 0.46875`.
#[inline]
fn erfc_outer(y: f64) -> f64 {
    if y >= ERFC_UNDERFLOW {
        0.0
    } else {
        scaled_outer(y) * exp_neg_square(y)
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= SMALL {
        return x * ratio_small(y * y);
    }
    let tail = erfc_outer(y);
    if x < 0.0 {
        tail - 1.0
    } else {
        1.0 - tail
    }
}

/// Complementary error function, accurate in relative terms for large `x`.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= SMALL {
        return 1.0 - x * ratio_small(y * y);
    }
    let tail = erfc_outer(y);
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Scaled complementary error function `exp(x^2) * erfc(x)`.
///
/// Returns `+inf` below [`ERFCX_OVERFLOW`]; use [`try_erfcx`] to get that as
/// an error instead.
pub fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    if y <= SMALL {
        let z = y * y;
        return z.exp() * (1.0 - x * ratio_small(z));
    }
    if x < ERFCX_OVERFLOW {
        return f64::INFINITY;
    }
    let r = scaled_outer(y);
    if x < 0.0 {
        2.0 * exp_pos_square(y) - r
    } else {
        r
    }
}

pub fn try_erfcx(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("erfcx of NaN".into()));
    }
    if x < ERFCX_OVERFLOW {
        return Err(Error::Overflow(format!("erfcx({x}) exceeds f64 range")));
    }
    Ok(erfcx(x))
}

//! Distribution functions built on [`crate::special`].

use crate::special::{beta_inc, erfc, gamma_q};

/// Two-sided 95% standard normal critical value.
pub const Z_975: f64 = 1.959_963_984_540_054;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Two-sided p-value of a standard normal statistic.
pub fn normal_two_sided(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    (2.0 * normal_sf(z.abs())).min(1.0)
}

/// Inverse standard normal CDF: Acklam's rational approximation polished
/// with one Halley step.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Two-sided p-value of a Student t statistic.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() || df.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    beta_inc(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

pub fn t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Quantile of Student's t for `p` in (0, 1), by bracketed bisection.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p < 0.5 {
        return -t_quantile(1.0 - p, df);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_cdf(hi, df) < p {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Upper tail of the chi-squared distribution.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Upper tail of the F distribution.
pub fn f_sf(x: f64, df1: f64, df2: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    beta_inc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from 40-digit mpmath evaluations.
    #[test]
    fn canonical_points_match_high_precision_reference() {
        let cases: [(&str, f64, f64); 12] = [
            ("ncdf(-3)", normal_cdf(-3.0), 0.001_349_898_031_630_094_5),
            ("ncdf(-1)", normal_cdf(-1.0), 0.158_655_253_931_457_05),
            ("ncdf(0.5)", normal_cdf(0.5), 0.691_462_461_274_013_1),
            ("ncdf(z975)", normal_cdf(Z_975), 0.975),
            ("t(2,5)", t_two_sided(2.0, 5.0), 0.101_939_478_829_858_36),
            ("t(3.31,42)", t_two_sided(3.31, 42.0), 0.001_922_214_320_648_476_7),
            ("t(1,1)", t_two_sided(1.0, 1.0), 0.5),
            ("t(0.5,30.5)", t_two_sided(0.5, 30.5), 0.620_663_523_914_525_7),
            ("chi2(3.84,1)", chi2_sf(3.841_458_820_694_124, 1.0), 0.050_000_000_000_000_06),
            ("chi2(7.64,2)", chi2_sf(7.64, 2.0), 0.021_927_800_894_261_62),
            ("chi2(20,1)", chi2_sf(20.0, 1.0), 7.744_216_431_044_084e-6),
            ("f(4,1,20)", f_sf(4.0, 1.0, 20.0), 0.059_265_535_446_570_5),
        ];
        for (name, got, want) in cases {
            assert!((got - want).abs() < 1e-8, "{name}: got {got}, want {want}");
        }
        assert!((chi2_sf(12.0, 7.0) - 0.100_558_868_508_358_84).abs() < 1e-12);
        assert!((f_sf(2.5, 3.0, 12.0) - 0.109_154_712_395_006_3).abs() < 1e-12);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        assert!((normal_quantile(0.975) - Z_975).abs() < 1e-13);
        assert!((normal_quantile(0.001) + 3.090_232_306_167_813_5).abs() < 1e-12);
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-14 * p.max(1e-3) * 1e3);
        }
    }

    #[test]
    fn t_quantile_known_values() {
        assert!((t_quantile(0.975, 48.0) - 2.010_634_757_624_232).abs() < 1e-10);
        assert!((t_quantile(0.975, 3.0) - 3.182_446_305_284_263).abs() < 1e-10);
        assert!((t_quantile(0.025, 3.0) + 3.182_446_305_284_263).abs() < 1e-10);
    }
}

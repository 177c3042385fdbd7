//! Reported squeezed/anti-squeezed variance pairs mapped onto `(r, ν)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SqueezedThermalParams;

/// Version tag of [`BUILTIN_POINTS`].
pub const OVERLAY_TABLE_VERSION: u32 = 1;

/// `(source, squeezing dB, anti-squeezing dB)`.
pub const BUILTIN_POINTS: [(&str, f64, f64); 5] = [
    ("Mehmet2011", 12.3, 19.3),
    ("Mehmet2011", 11.4, 16.8),
    ("Meylahn2022", 13.5, 22.3),
    ("Meylahn2022", 13.2, 23.4),
    ("Meylahn2022", 11.5, 17.5),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPoint {
    pub label: String,
    pub s_db: f64,
    pub a_db: f64,
    pub r: f64,
    pub nu: f64,
    pub x: f64,
}

impl ExperimentPoint {
    /// `V₋ = 10^{−s/10}`, `V₊ = 10^{a/10}`, `ν = √(V₋V₊)`, `r = ¼ ln(V₊/V₋)`.
    pub fn from_db(label: &str, s_db: f64, a_db: f64) -> Result<Self> {
        if !(s_db > 0.0 && a_db > 0.0) {
            return Err(Error::Unphysical(format!("{label}: dB values must be positive, got {s_db}/{a_db}")));
        }
        if a_db < s_db {
            return Err(Error::Unphysical(format!("{label}: anti-squeezing {a_db} dB below squeezing {s_db} dB gives ν < 1")));
        }
        let v_minus = 10f64.powf(-s_db / 10.0);
        let v_plus = 10f64.powf(a_db / 10.0);
        let nu = (v_minus * v_plus).sqrt();
        let r = 0.25 * (v_plus / v_minus).ln();
        Ok(Self { label: label.to_string(), s_db, a_db, r, nu, x: (2.0 * r).cosh() / nu })
    }

    pub fn params(&self) -> Result<SqueezedThermalParams> {
        SqueezedThermalParams::new(self.nu, self.r)
    }

    /// `ν < cosh 2r`: the naive Bayes reverse is not completely positive.
    pub fn in_nonclassical_sector(&self) -> bool {
        self.x > 1.0
    }
}

pub fn builtin_points() -> Vec<ExperimentPoint> {
    BUILTIN_POINTS.iter().map(|&(l, s, a)| ExperimentPoint::from_db(l, s, a).expect("built-in points are physical")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_inverts_to_variances() {
        for p in builtin_points() {
            let g = p.params().unwrap();
            assert!((10.0 * g.v_p().log10() + p.s_db).abs() < 1e-12);
            assert!((10.0 * g.v_q().log10() - p.a_db).abs() < 1e-12);
        }
    }

    #[test]
    fn all_builtin_points_are_beyond_threshold() {
        let pts = builtin_points();
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(ExperimentPoint::in_nonclassical_sector));
    }

    #[test]
    fn unphysical_pairs_rejected() {
        assert!(ExperimentPoint::from_db("x", 10.0, 5.0).is_err());
        assert!(ExperimentPoint::from_db("x", 0.0, 5.0).is_err());
        let equal = ExperimentPoint::from_db("x", 6.0, 6.0).unwrap();
        assert!((equal.nu - 1.0).abs() < 1e-15);
    }
}

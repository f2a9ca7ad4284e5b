//! Float → ℚ(√2) conversion of evaluated tables.

use thiserror::Error;

use crate::qsqrt2::QSqrt2;
use crate::scalar::Scalar;
use crate::table::JointTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnapError {
    #[error("entry {key} = {value:e} has no exact form (p+q*sqrt2)/r within tolerance")]
    NoCandidate { key: String, value: f64 },
    #[error("snapped entries sum to {0}, not 1")]
    NotNormalized(String),
}

/// Replaces every entry by its exact candidate; fails if any entry has
/// none or the exact entries do not sum to one.
pub fn snap_table(t: &JointTable<f64>) -> Result<JointTable<QSqrt2>, SnapError> {
    let snapped = t.try_map(|&p| {
        QSqrt2::snap(p).ok_or(SnapError::NoCandidate {
            key: String::new(),
            value: p,
        })
    });
    let snapped = match snapped {
        Ok(s) => s,
        Err(SnapError::NoCandidate { value, .. }) => {
            let (a, _) = t.iter().find(|(_, p)| **p == value).expect("entry exists");
            let key = a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            return Err(SnapError::NoCandidate { key, value });
        }
        Err(e) => return Err(e),
    };
    let total = snapped.total();
    if !total.approx_eq(&QSqrt2::from_ratio(1, 1)) {
        return Err(SnapError::NotNormalized(total.format()));
    }
    Ok(snapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Alphabet;

    #[test]
    fn snaps_rational_and_quadratic_entries() {
        let c = (std::f64::consts::PI / 8.0).cos().powi(2);
        let t = JointTable::new(vec![Alphabet::new("X", 2)], vec![c, 1.0 - c]).unwrap();
        let s = snap_table(&t).unwrap();
        assert_eq!(s.probs(), &[QSqrt2::from_parts(2, 1, 4), QSqrt2::from_parts(2, -1, 4)]);
    }

    #[test]
    fn reports_offending_entry() {
        let t = JointTable::new(vec![Alphabet::new("X", 2)], vec![0.3, 0.7]).unwrap();
        match snap_table(&t) {
            Err(SnapError::NoCandidate { key, value }) => {
                assert_eq!(key, "0");
                assert_eq!(value, 0.3);
            }
            other => panic!("{other:?}"),
        }
    }
}

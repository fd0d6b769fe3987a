use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Train/dev/test fractions of the patient count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            dev: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, dev: f64, test: f64) -> Result<Self> {
        let r = SplitRatios { train, dev, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.dev, self.test];
        if parts
            .iter()
            .any(|&p| p.is_nan() || p <= 0.0 || !p.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "split ratios must be positive, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

impl FromStr for SplitRatios {
    type Err = Error;

    /// `0.8,0.1,0.1`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("ratios `{s}`: {e}")))?;
        match parts.as_slice() {
            [a, b, c] => SplitRatios::new(*a, *b, *c),
            _ => Err(Error::InvalidInput(format!(
                "ratios `{s}`: expected three comma-separated fractions"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub ratios: SplitRatios,
}

/// Shuffles the sorted patient list with a seeded RNG and cuts it at the
/// rounded cumulative ratios. Every note and sample follows its patient, so
/// the three parts never share a patient.
pub fn split_by_patient(dataset: &Dataset, ratios: SplitRatios, seed: u64) -> Result<Split> {
    ratios.validate()?;
    let mut patients = dataset.patients();
    let n = patients.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "a three-way split needs at least 3 patients, dataset has {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    patients.shuffle(&mut rng);

    let first = ((n as f64) * ratios.train).round() as usize;
    let second = ((n as f64) * (ratios.train + ratios.dev)).round() as usize;
    let first = first.min(n);
    let second = second.clamp(first, n);

    let part = |range: std::ops::Range<usize>| -> Dataset {
        let set: HashSet<&str> = patients[range].iter().copied().collect();
        dataset.restrict_to_patients(&set)
    };
    Ok(Split {
        train: part(0..first),
        dev: part(first..second),
        test: part(second..n),
        seed,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ContextEntry;

    fn patients(n: usize) -> Dataset {
        Dataset::new(
            (0..n)
                .map(|i| ContextEntry {
                    note_id: format!("n{i}"),
                    patient_id: format!("p{i}"),
                    context: "x".into(),
                    qas: Vec::new(),
                })
                .collect(),
        )
    }

    #[test]
    fn ten_patients_eight_one_one() {
        let s = split_by_patient(&patients(10), SplitRatios::default(), 3).unwrap();
        assert_eq!(
            (
                s.train.patients().len(),
                s.dev.patients().len(),
                s.test.patients().len()
            ),
            (8, 1, 1)
        );
    }

    #[test]
    fn deterministic() {
        let d = patients(20);
        assert_eq!(
            split_by_patient(&d, SplitRatios::default(), 7).unwrap(),
            split_by_patient(&d, SplitRatios::default(), 7).unwrap()
        );
    }

    #[test]
    fn too_few_patients() {
        assert!(split_by_patient(&patients(2), SplitRatios::default(), 1).is_err());
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(
            "0.8,0.1,0.1".parse::<SplitRatios>().unwrap(),
            SplitRatios::default()
        );
        assert!("0.8,0.1".parse::<SplitRatios>().is_err());
        assert!("0.8,0.3,0.1".parse::<SplitRatios>().is_err());
        assert!("1.0,0.0,0.0".parse::<SplitRatios>().is_err());
    }
}

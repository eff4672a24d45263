//! Sampled closed-loop trajectories.

use crate::error::{Error, Result};

/// One recorded sample. Optional entries are absent when the corresponding
/// part of the pipeline (estimator, certificate, observer) is disabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: f64,
    pub chi: f64,
    pub v: f64,
    pub k_hat: Option<f64>,
    pub lyap_v: Option<f64>,
    pub lyap_w: Option<f64>,
    pub eta_l2: Option<f64>,
}

impl Sample {
    pub fn is_finite(&self) -> bool {
        [self.t, self.y, self.chi, self.v].iter().all(|v| v.is_finite())
            && [self.k_hat, self.lyap_v, self.lyap_w, self.eta_l2]
                .iter()
                .flatten()
                .all(|v| v.is_finite())
    }
}

/// Named columns, including a few derived from the reference values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Y,
    Chi,
    V,
    KHat,
    LyapV,
    LyapW,
    EtaL2,
    /// `|y - y_r|`.
    TrackingError,
    /// `|k̂ - k|`.
    EstimateError,
}

impl std::str::FromStr for Column {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "y" => Column::Y,
            "chi" => Column::Chi,
            "v" => Column::V,
            "k_hat" => Column::KHat,
            "V" => Column::LyapV,
            "W" => Column::LyapW,
            "eta_l2" => Column::EtaL2,
            "tracking" => Column::TrackingError,
            "k_err" => Column::EstimateError,
            other => return Err(Error::validation("column", format!("unknown column {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    /// Output reference of the run, used by [`Column::TrackingError`].
    pub y_r: f64,
    /// True reaction coefficient, used by [`Column::EstimateError`].
    pub k_true: f64,
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn new(y_r: f64, k_true: f64) -> Self {
        TimeSeries {
            y_r,
            k_true,
            samples: Vec::new(),
        }
    }

    /// Appends a sample; time must strictly increase.
    pub fn push(&mut self, s: Sample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(s.t > last.t) {
                return Err(Error::Numerical(format!(
                    "time series not increasing ({} after {})",
                    s.t, last.t
                )));
            }
        }
        self.samples.push(s);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn value(&self, s: &Sample, column: Column) -> Option<f64> {
        match column {
            Column::Y => Some(s.y),
            Column::Chi => Some(s.chi),
            Column::V => Some(s.v),
            Column::KHat => s.k_hat,
            Column::LyapV => s.lyap_v,
            Column::LyapW => s.lyap_w,
            Column::EtaL2 => s.eta_l2,
            Column::TrackingError => Some((s.y - self.y_r).abs()),
            Column::EstimateError => s.k_hat.map(|k| (k - self.k_true).abs()),
        }
    }

    /// The column as a vector, or `None` if any sample lacks it.
    pub fn column(&self, column: Column) -> Option<Vec<f64>> {
        self.samples.iter().map(|s| self.value(s, column)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, y: f64) -> Sample {
        Sample {
            t,
            y,
            chi: 0.0,
            v: 0.0,
            k_hat: Some(1.5),
            lyap_v: None,
            lyap_w: None,
            eta_l2: None,
        }
    }

    #[test]
    fn push_requires_increasing_time() {
        let mut ts = TimeSeries::new(1.0, 2.0);
        ts.push(sample(0.0, 1.0)).unwrap();
        ts.push(sample(0.1, 1.0)).unwrap();
        assert!(ts.push(sample(0.1, 1.0)).is_err());
        assert_eq!(ts.len(), 2);
    }

    #[test]
    fn derived_columns() {
        let mut ts = TimeSeries::new(1.0, 2.0);
        ts.push(sample(0.0, 1.75)).unwrap();
        assert_eq!(ts.column(Column::TrackingError).unwrap(), vec![0.75]);
        assert_eq!(ts.column(Column::EstimateError).unwrap(), vec![0.5]);
        assert!(ts.column(Column::LyapV).is_none());
        assert_eq!("V".parse::<Column>().unwrap(), Column::LyapV);
        assert!("nope".parse::<Column>().is_err());
    }
}

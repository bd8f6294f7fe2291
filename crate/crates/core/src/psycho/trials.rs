//! Trial CSV ingestion and per-condition fit tables.
//!
//! Input columns (header required):
//! `observer_id,image_id,distance_cm,spatial_freq_cpi,amplitude_cm,response`.
//! Output columns:
//! `observer_id,image_id,distance_cm,spatial_freq_cpi,mu_cm,sigma_cm,n_trials,flag`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Deserialize;

use super::fit::{fit_cumulative_gaussian, Orientation, PsychometricDataset, PsychometricFit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TrialRow {
    pub observer_id: String,
    pub image_id: String,
    pub distance_cm: f64,
    pub spatial_freq_cpi: f64,
    pub amplitude_cm: f64,
    pub response: u8,
}

/// Grouping key for independent fits.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionKey {
    pub observer_id: String,
    pub image_id: String,
    pub distance_cm: f64,
    pub spatial_freq_cpi: f64,
}

impl Eq for ConditionKey {}

impl Ord for ConditionKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.observer_id
            .cmp(&other.observer_id)
            .then_with(|| self.image_id.cmp(&other.image_id))
            .then_with(|| self.distance_cm.total_cmp(&other.distance_cm))
            .then_with(|| self.spatial_freq_cpi.total_cmp(&other.spatial_freq_cpi))
    }
}

impl PartialOrd for ConditionKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter {
        name: "trial csv",
        reason: e.to_string(),
    }
}

/// Parses and validates trial rows. Row numbers in errors are 1-based data rows.
pub fn read_trials<R: Read>(reader: R) -> Result<Vec<TrialRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<TrialRow>().enumerate() {
        let row = rec.map_err(csv_err)?;
        if row.response > 1 {
            return Err(Error::InvalidParameter {
                name: "response",
                reason: format!("row {}: {} is not 0 or 1", i + 1, row.response),
            });
        }
        if !(row.amplitude_cm.is_finite() && row.amplitude_cm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "amplitude_cm",
                reason: format!("row {}: {} must be positive", i + 1, row.amplitude_cm),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn group_by_condition(rows: &[TrialRow]) -> BTreeMap<ConditionKey, PsychometricDataset> {
    let mut groups: BTreeMap<ConditionKey, PsychometricDataset> = BTreeMap::new();
    for r in rows {
        let key = ConditionKey {
            observer_id: r.observer_id.clone(),
            image_id: r.image_id.clone(),
            distance_cm: r.distance_cm,
            spatial_freq_cpi: r.spatial_freq_cpi,
        };
        groups.entry(key).or_default().push(r.amplitude_cm, r.response == 1);
    }
    groups
}

/// Outcome of fitting one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionFit {
    pub key: ConditionKey,
    pub n_trials: usize,
    /// `None` when the data were degenerate.
    pub fit: Option<PsychometricFit>,
}

pub fn fit_conditions(rows: &[TrialRow], orientation: Orientation) -> Result<Vec<ConditionFit>> {
    group_by_condition(rows)
        .into_iter()
        .map(|(key, data)| {
            let fit = match fit_cumulative_gaussian(&data, orientation) {
                Ok(f) => Some(f),
                Err(Error::DegenerateData(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(ConditionFit {
                key,
                n_trials: data.len(),
                fit,
            })
        })
        .collect()
}

pub fn write_fits<W: Write>(out: W, fits: &[ConditionFit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "observer_id",
        "image_id",
        "distance_cm",
        "spatial_freq_cpi",
        "mu_cm",
        "sigma_cm",
        "n_trials",
        "flag",
    ])
    .map_err(csv_err)?;
    for f in fits {
        let (mu, sigma, flag) = match &f.fit {
            Some(fit) => (format!("{:.6}", fit.mu), format!("{:.6}", fit.sigma), "ok"),
            None => (String::new(), String::new(), "degenerate"),
        };
        w.write_record([
            f.key.observer_id.clone(),
            f.key.image_id.clone(),
            f.key.distance_cm.to_string(),
            f.key.spatial_freq_cpi.to_string(),
            mu,
            sigma,
            f.n_trials.to_string(),
            flag.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "observer_id,image_id,distance_cm,spatial_freq_cpi,amplitude_cm,response
s1,img1,110,1,0.1,1
s1,img1,110,1,0.1,1
s1,img1,110,1,0.4,0
s1,img1,110,1,0.4,1
s1,img1,110,1,3.3,0
s1,img1,110,1,3.3,0
s1,img1,220,1,0.4,1
s1,img1,220,1,0.8,1
";

    #[test]
    fn groups_and_flags() {
        let rows = read_trials(CSV.as_bytes()).unwrap();
        assert_eq!(rows.len(), 8);
        let fits = fit_conditions(&rows, Orientation::Decreasing).unwrap();
        assert_eq!(fits.len(), 2);
        assert_eq!(fits[0].key.distance_cm, 110.0);
        assert_eq!(fits[0].n_trials, 6);
        assert!(fits[0].fit.is_some());
        assert!(fits[1].fit.is_none());

        let mut buf = Vec::new();
        write_fits(&mut buf, &fits).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "observer_id,image_id,distance_cm,spatial_freq_cpi,mu_cm,sigma_cm,n_trials,flag");
        assert!(lines[1].ends_with(",6,ok"));
        assert_eq!(lines[2], "s1,img1,220,1,,,2,degenerate");
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = "observer_id,image_id,distance_cm,spatial_freq_cpi,amplitude_cm,response\na,b,110,1,0.4,2\n";
        assert!(read_trials(bad.as_bytes()).is_err());
        let bad = "observer_id,image_id,distance_cm,spatial_freq_cpi,amplitude_cm,response\na,b,110,1,0,1\n";
        assert!(read_trials(bad.as_bytes()).is_err());
        let missing = "observer_id,image_id,distance_cm,amplitude_cm,response\na,b,110,0.4,1\n";
        assert!(read_trials(missing.as_bytes()).is_err());
    }
}

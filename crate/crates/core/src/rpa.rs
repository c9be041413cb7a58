//! Confidence-threshold review sweep.
//!
//! For a threshold `tau`, every prediction entity with confidence strictly
//! below `tau` goes to a (perfect) human reviewer. Reviewed substitutions are
//! corrected in place, reviewed deletions are removed, and reviewed true
//! positives are left alone. Missing entities are never added by review.

use std::io::{self, Write};

use serde::Serialize;

use crate::matching::{EntityLabel, GroupMatchResult};
use crate::model::TauGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub tau: f64,
    /// `1 - reviewed / |predictions|`
    pub auto_rate: f64,
    /// `1 - (subs_tau + del_tau + add) / (n_pr_star + add)`
    pub kieval_aligned_tau: f64,
    pub reviewed: usize,
    /// Substitutions left among automated (confidence >= tau) predictions.
    pub subs_tau: usize,
    /// Deletions left among automated predictions.
    pub del_tau: usize,
    pub add: usize,
    /// Predictions remaining after review removed the reviewed deletions.
    pub n_pr_star: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error(
        "document '{doc_id}' {location} ('{entity_type}') has no confidence; the sweep needs one on every prediction"
    )]
    MissingConfidence {
        doc_id: String,
        location: String,
        entity_type: String,
    },
}

/// Sweeps `grid` over the labeled predictions of every document. Points come
/// back in grid order.
pub fn sweep(matches: &[GroupMatchResult<'_>], grid: &TauGrid) -> Result<Vec<SweepPoint>, SweepError> {
    let mut predictions: Vec<(f64, EntityLabel)> = Vec::new();
    let mut add = 0usize;
    for m in matches {
        for (gi, (group, labels)) in m.pred.groups.iter().zip(&m.pred_labels).enumerate() {
            for (ei, (entity, &label)) in group.entities.iter().zip(labels).enumerate() {
                let confidence = entity.confidence.ok_or_else(|| SweepError::MissingConfidence {
                    doc_id: m.pred.doc_id.clone(),
                    location: format!("groups[{gi}].entities[{ei}]"),
                    entity_type: entity.entity_type.clone(),
                })?;
                predictions.push((confidence, label));
            }
        }
        add += m.gt_labels.iter().flatten().filter(|&&l| l == EntityLabel::Add).count();
    }

    let total = predictions.len();
    Ok(grid
        .values()
        .iter()
        .map(|&tau| {
            let mut reviewed = 0;
            let mut reviewed_del = 0;
            let mut subs_tau = 0;
            let mut del_tau = 0;
            for &(confidence, label) in &predictions {
                if confidence < tau {
                    reviewed += 1;
                    if label == EntityLabel::Del {
                        reviewed_del += 1;
                    }
                } else {
                    match label {
                        EntityLabel::Subs => subs_tau += 1,
                        EntityLabel::Del => del_tau += 1,
                        _ => {}
                    }
                }
            }
            let n_pr_star = total - reviewed_del;
            let auto_rate = if total == 0 {
                1.0
            } else {
                1.0 - reviewed as f64 / total as f64
            };
            let den = n_pr_star + add;
            let kieval_aligned_tau = if den == 0 {
                1.0
            } else {
                1.0 - (subs_tau + del_tau + add) as f64 / den as f64
            };
            SweepPoint {
                tau,
                auto_rate,
                kieval_aligned_tau,
                reviewed,
                subs_tau,
                del_tau,
                add,
                n_pr_star,
            }
        })
        .collect())
}

pub const CURVE_HEADER: &str = "tau,auto_rate,kieval_aligned_tau,reviewed,subs_tau,del_tau,add,n_pr_star";

pub fn write_curve_csv<W: Write>(points: &[SweepPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.tau, p.auto_rate, p.kieval_aligned_tau, p.reviewed, p.subs_tau, p.del_tau, p.add, p.n_pr_star
        )?;
    }
    Ok(())
}

/// The largest threshold whose automation rate is still at least `floor`.
pub fn knee(points: &[SweepPoint], floor: f64) -> Option<&SweepPoint> {
    points
        .iter()
        .filter(|p| p.auto_rate >= floor)
        .max_by(|a, b| a.tau.total_cmp(&b.tau))
}

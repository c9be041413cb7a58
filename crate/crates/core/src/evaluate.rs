//! Dataset-level driver: match every document pair, count, aggregate.

use rayon::prelude::*;

use crate::ingest::DocPair;
use crate::matching::{match_groups, GroupMatchResult};
use crate::metrics::{aggregate, evaluate_document, EvaluationCounts, MetricReport};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvaluateOptions {
    pub per_doc: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Group matches for every pair, in pair order.
pub fn match_pairs<'a>(pairs: &'a [DocPair<'_>], threads: Option<usize>) -> Vec<GroupMatchResult<'a>> {
    with_threads(threads, || {
        pairs.par_iter().map(|p| match_groups(&p.pred, &p.gt)).collect()
    })
}

pub fn evaluate_pairs(pairs: &[DocPair<'_>], options: &EvaluateOptions) -> MetricReport {
    let per_doc: Vec<(String, EvaluationCounts)> = with_threads(options.threads, || {
        pairs
            .par_iter()
            .map(|p| (p.doc_id.clone(), evaluate_document(&match_groups(&p.pred, &p.gt))))
            .collect()
    });
    aggregate(per_doc, options.per_doc)
}

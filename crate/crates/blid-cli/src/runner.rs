use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{case_seed, SuiteConfig};
use crate::report::{CaseResult, PlotSeries, Report};
use crate::suites;

/// Runs every case of a suite and assembles the report. Cases run in
/// parallel but draw from per-case generators and are sorted afterwards,
/// so the report does not depend on scheduling.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<(Report, Vec<(String, PlotSeries)>)> {
    let specs = suites::suite_cases(name)?;
    let mut paired: Vec<(CaseResult, Vec<PlotSeries>)> = specs
        .par_iter()
        .map(|spec| {
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed(cfg.seed, &spec.id));
            match spec.run(cfg, &mut rng) {
                Ok(out) => (
                    CaseResult {
                        case_id: spec.id.clone(),
                        pass: out.pass,
                        summary: out.summary,
                        observed: out.observed,
                        bound: out.bound,
                        details: out.details,
                    },
                    out.series,
                ),
                Err(e) => (CaseResult::failed(&spec.id, format!("{e:#}")), Vec::new()),
            }
        })
        .collect();
    paired.sort_by(|a, b| a.0.case_id.cmp(&b.0.case_id));

    let mut cases = Vec::with_capacity(paired.len());
    let mut series = Vec::new();
    for (case, attached) in paired {
        for s in attached {
            series.push((case.case_id.clone(), s));
        }
        cases.push(case);
    }
    Ok((Report::new(name, cfg.seed, cfg.fingerprint(), cases), series))
}

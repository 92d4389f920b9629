//! The full funnel over a range of largest edges.
//!
//! Work is partitioned by the largest edge `x1`. Each `x1` is scanned
//! independently against a shared immutable [`ParallelogramIndex`]; results
//! are merged in ascending `x1` order, so output never depends on the number
//! of workers or the order in which workers finish.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::ops::AddAssign;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{self, conditions_met, CandidateTriple, Decision};
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::parallelogram::{enumerate_range, ParallelogramIndex};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Survivor counts at each stage of the funnel. One canonical triple counts once.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelStats {
    pub configs_tested: u64,
    pub pass_ge1: u64,
    pub pass_ge2: u64,
    pub pass_ge3: u64,
    pub pass_all4: u64,
    /// Certificates emitted.
    pub realizable: u64,
}

impl FunnelStats {
    pub fn is_monotone(&self) -> bool {
        self.configs_tested >= self.pass_ge1
            && self.pass_ge1 >= self.pass_ge2
            && self.pass_ge2 >= self.pass_ge3
            && self.pass_ge3 >= self.pass_all4
            && self.pass_all4 >= self.realizable
    }

    #[inline]
    fn record(&mut self, met: u8) {
        self.configs_tested += 1;
        self.pass_ge1 += (met >= 1) as u64;
        self.pass_ge2 += (met >= 2) as u64;
        self.pass_ge3 += (met >= 3) as u64;
        self.pass_all4 += (met == 4) as u64;
    }
}

impl AddAssign for FunnelStats {
    fn add_assign(&mut self, o: Self) {
        self.configs_tested += o.configs_tested;
        self.pass_ge1 += o.pass_ge1;
        self.pass_ge2 += o.pass_ge2;
        self.pass_ge3 += o.pass_ge3;
        self.pass_all4 += o.pass_all4;
        self.realizable += o.realizable;
    }
}

impl fmt::Display for FunnelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "non-oblique edge-matched configurations tested: {}",
            self.configs_tested
        )?;
        writeln!(
            f,
            "satisfied at least one body diagonal condition:  {}",
            self.pass_ge1
        )?;
        writeln!(
            f,
            "satisfied at least two:                          {}",
            self.pass_ge2
        )?;
        writeln!(
            f,
            "satisfied at least three:                        {}",
            self.pass_ge3
        )?;
        writeln!(
            f,
            "satisfied all four:                              {}",
            self.pass_all4
        )?;
        write!(
            f,
            "realizable perfect parallelepipeds:              {}",
            self.realizable
        )
    }
}

/// Machine-readable summary of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub max_edge: u32,
    pub min_edge: u32,
    pub complete: bool,
    #[serde(flatten)]
    pub stats: FunnelStats,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub max_edge: u32,
    pub min_edge: u32,
    pub primitive_only: bool,
    pub workers: usize,
    pub checkpoint_path: Option<PathBuf>,
    /// Continue from `checkpoint_path` instead of starting over.
    pub resume: bool,
    /// Stop after this many `x1` values have been completed by this call.
    pub stop_after: Option<usize>,
}

impl SearchConfig {
    pub fn new(max_edge: u32) -> Self {
        Self {
            max_edge,
            min_edge: 1,
            primitive_only: false,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            checkpoint_path: None,
            resume: false,
            stop_after: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_edge == 0 || self.min_edge > self.max_edge {
            return Err(Error::Usage(format!(
                "edge range must satisfy 1 <= min_edge <= max_edge, got min_edge={} max_edge={}",
                self.min_edge, self.max_edge
            )));
        }
        if self.max_edge > crate::arith::MAX_EDGE {
            return Err(Error::Budget(self.max_edge));
        }
        if self.workers == 0 {
            return Err(Error::Usage("workers must be at least 1".into()));
        }
        if self.resume && self.checkpoint_path.is_none() {
            return Err(Error::Usage("resume requires a checkpoint path".into()));
        }
        Ok(())
    }
}

/// Everything found for one value of the largest edge.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct X1Result {
    pub x1: u32,
    pub stats: FunnelStats,
    pub certificates: Vec<Certificate>,
    /// Triples passing all four body-diagonal conditions, realizable or not.
    pub all_four: Vec<CandidateTriple>,
}

/// Runs the funnel for every triple with largest edge `x1`.
pub fn scan_x1(index: &ParallelogramIndex, x1: u32, primitive_only: bool) -> Result<X1Result> {
    let mut out = X1Result {
        x1,
        ..Default::default()
    };
    for t in assembly::assemble(index, x1) {
        let squares = t.body_diagonal_squares();
        let met = conditions_met(&squares);
        out.stats.record(met);
        if met < 4 {
            continue;
        }
        out.all_four.push(t);
        if assembly::realizability(&t)?.decision != Decision::Realizable {
            continue;
        }
        let body = assembly::body_diagonals(&t).expect("all four conditions met");
        let cert = Certificate::build(&t, &body)?;
        if primitive_only && !cert.primitive {
            continue;
        }
        out.stats.realizable += 1;
        out.certificates.push(cert);
    }
    Ok(out)
}

/// Persistent progress of a run, stored as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub max_edge: u32,
    pub min_edge: u32,
    pub primitive_only: bool,
    pub completed_x1: BTreeSet<u32>,
    pub stats: FunnelStats,
    pub emitted: u64,
    pub certificates: Vec<Certificate>,
    pub all_four: Vec<CandidateTriple>,
}

impl Checkpoint {
    fn fresh(config: &SearchConfig) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            max_edge: config.max_edge,
            min_edge: config.min_edge,
            primitive_only: config.primitive_only,
            completed_x1: BTreeSet::new(),
            stats: FunnelStats::default(),
            emitted: 0,
            certificates: Vec::new(),
            all_four: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.completed_x1.len() == (self.min_edge..=self.max_edge).count()
    }

    pub fn stats_record(&self) -> StatsRecord {
        StatsRecord {
            max_edge: self.max_edge,
            min_edge: self.min_edge,
            complete: self.is_complete(),
            stats: self.stats,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let corrupt = |reason: String| Error::CheckpointCorrupt {
            path: path.to_owned(),
            reason,
        };
        let text = fs::read_to_string(path)?;
        let cp: Self = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(corrupt(format!("unsupported version {}", cp.version)));
        }
        if cp.min_edge == 0 || cp.min_edge > cp.max_edge {
            return Err(corrupt(format!(
                "invalid edge range {}..={}",
                cp.min_edge, cp.max_edge
            )));
        }
        if cp
            .completed_x1
            .iter()
            .any(|x| !(cp.min_edge..=cp.max_edge).contains(x))
        {
            return Err(corrupt("completed x1 outside the edge range".into()));
        }
        if cp.emitted != cp.certificates.len() as u64 || cp.emitted != cp.stats.realizable {
            return Err(corrupt("certificate count disagrees with stats".into()));
        }
        if cp.all_four.len() as u64 != cp.stats.pass_all4 || !cp.stats.is_monotone() {
            return Err(corrupt("funnel counters are inconsistent".into()));
        }
        if let Some(bad) = cp.certificates.iter().find_map(|c| c.verify().err()) {
            return Err(corrupt(format!(
                "stored certificate fails verification: {bad}"
            )));
        }
        Ok(cp)
    }

    /// Writes to a sibling temp file and renames it over `path`.
    pub fn store(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let mut file = fs::File::create(&tmp)?;
        serde_json::to_writer(&mut file, self).map_err(std::io::Error::from)?;
        file.write_all(b"\n")?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    fn check_matches(&self, config: &SearchConfig, path: &Path) -> Result<()> {
        let mismatch = |reason: String| Error::CheckpointMismatch {
            path: path.to_owned(),
            reason,
        };
        if self.max_edge != config.max_edge {
            return Err(mismatch(format!(
                "max_edge {} != {}",
                self.max_edge, config.max_edge
            )));
        }
        if self.min_edge != config.min_edge {
            return Err(mismatch(format!(
                "min_edge {} != {}",
                self.min_edge, config.min_edge
            )));
        }
        if self.primitive_only != config.primitive_only {
            return Err(mismatch(format!(
                "primitive_only {} != {}",
                self.primitive_only, config.primitive_only
            )));
        }
        Ok(())
    }

    fn absorb(&mut self, r: X1Result) {
        self.completed_x1.insert(r.x1);
        self.stats += r.stats;
        self.emitted += r.certificates.len() as u64;
        self.certificates.extend(r.certificates);
        self.all_four.extend(r.all_four);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    /// Sorted by `(x1, x2, x3, d12, d13, d23)`.
    pub certificates: Vec<Certificate>,
    pub stats: FunnelStats,
    pub all_four: Vec<CandidateTriple>,
    pub complete: bool,
}

/// Progress notifications, delivered in ascending `x1` order.
#[derive(Debug)]
pub enum Event<'a> {
    /// Emitted once before any scanning when continuing from a checkpoint.
    Resumed {
        certificates: &'a [Certificate],
        stats: &'a FunnelStats,
        completed: usize,
    },
    Finished {
        x1: u32,
        certificates: &'a [Certificate],
        stats: &'a FunnelStats,
        remaining: usize,
    },
}

pub fn run(config: &SearchConfig) -> Result<SearchOutcome> {
    run_with(config, |_| Ok(()))
}

/// Continues the run recorded in a checkpoint file.
pub fn resume(checkpoint_path: &Path, workers: usize) -> Result<SearchOutcome> {
    let cp = Checkpoint::load(checkpoint_path)?;
    let config = SearchConfig {
        max_edge: cp.max_edge,
        min_edge: cp.min_edge,
        primitive_only: cp.primitive_only,
        workers,
        checkpoint_path: Some(checkpoint_path.to_owned()),
        resume: true,
        stop_after: None,
    };
    run_with(&config, |_| Ok(()))
}

/// Runs the search, calling `observe` after each completed `x1`.
pub fn run_with<F>(config: &SearchConfig, mut observe: F) -> Result<SearchOutcome>
where
    F: FnMut(Event<'_>) -> Result<()>,
{
    config.validate()?;
    let mut state = match (&config.checkpoint_path, config.resume) {
        (Some(path), true) => {
            let cp = Checkpoint::load(path)?;
            cp.check_matches(config, path)?;
            observe(Event::Resumed {
                certificates: &cp.certificates,
                stats: &cp.stats,
                completed: cp.completed_x1.len(),
            })?;
            cp
        }
        _ => Checkpoint::fresh(config),
    };

    let mut pending: Vec<u32> = (config.min_edge..=config.max_edge)
        .filter(|x| !state.completed_x1.contains(x))
        .collect();
    if let Some(limit) = config.stop_after {
        pending.truncate(limit);
    }

    if !pending.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {} workers: {e}", config.workers)))?;
        let index = pool.install(|| enumerate_range(config.max_edge, 1))?;
        let batch = config.workers * 4;
        let mut remaining = (config.min_edge..=config.max_edge).count() - state.completed_x1.len();
        for chunk in pending.chunks(batch) {
            let results: Vec<X1Result> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|&x1| scan_x1(&index, x1, config.primitive_only))
                    .collect::<Result<_>>()
            })?;
            for r in results {
                let x1 = r.x1;
                let first_new = state.certificates.len();
                state.absorb(r);
                remaining -= 1;
                if let Some(path) = &config.checkpoint_path {
                    state.store(path)?;
                }
                observe(Event::Finished {
                    x1,
                    certificates: &state.certificates[first_new..],
                    stats: &state.stats,
                    remaining,
                })?;
            }
        }
    } else if let Some(path) = &config.checkpoint_path {
        state.store(path)?;
    }

    Ok(SearchOutcome {
        complete: state.is_complete(),
        certificates: state.certificates,
        stats: state.stats,
        all_four: state.all_four,
    })
}

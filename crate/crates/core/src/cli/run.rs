//! Running experiment files and writing their results.
//!
//! For every block `name`, `run` writes `name.csv` with the columns
//!
//! ```text
//! snr_db,trials,bit_errors,frame_errors,ber,fer,seconds
//! ```
//!
//! where `ber = bit_errors / (trials * K)` for the block's `K` information
//! bits and `fer = frame_errors / trials`. Rows are appended to
//! `name.csv.partial` as each point finishes and the file is renamed once the
//! sweep completes, so an interrupted run leaves only the `.partial` file.
//!
//! Alongside the CSVs it writes `comparison.dat` (one gnuplot data block per
//! sweep), `comparison.gp` (a script plotting them together) and `gaps.csv`
//! (SNR gap of every `jncld` block against every `mmse` block on the same
//! channel, at BER 1e-2, 1e-3 and 1e-4).

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::ExperimentFile;
use crate::relay_sim::{BerRecord, Frontend, SimError, Simulator};

pub const CSV_HEADER: &str = "snr_db,trials,bit_errors,frame_errors,ber,fer,seconds";
pub const GAP_TARGETS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("block `{block}`: {source}")]
    Sim { block: String, source: SimError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    /// Overrides the file's `output_dir`.
    pub out_dir: Option<PathBuf>,
    /// Overrides every block's seed.
    pub seed: Option<u64>,
    /// Write 0 in the `seconds` column so reruns are byte-identical.
    pub no_timing: bool,
    /// Suppress progress output.
    pub quiet: bool,
}

/// Results of one sweep.
#[derive(Debug, Clone)]
pub struct BlockResult {
    pub name: String,
    pub frontend: Frontend,
    pub info_bits: usize,
    pub csv: PathBuf,
    pub records: Vec<BerRecord>,
}

/// SNR gap between two sweeps at one target BER.
#[derive(Debug, Clone, PartialEq)]
pub struct Gap {
    pub baseline: String,
    pub candidate: String,
    pub target_ber: f64,
    pub snr_baseline: Option<f64>,
    pub snr_candidate: Option<f64>,
}

impl Gap {
    /// How many dB less the candidate needs, when both curves cross the target.
    pub fn gap_db(&self) -> Option<f64> {
        Some(self.snr_baseline? - self.snr_candidate?)
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub blocks: Vec<BlockResult>,
    pub gaps: Vec<Gap>,
}

pub fn run(exp: &ExperimentFile, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| exp.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;

    let mut blocks = Vec::with_capacity(exp.blocks.len());
    for block in &exp.blocks {
        let mut cfg = block.config.clone();
        if let Some(seed) = opts.seed {
            cfg.seed = seed;
        }
        let sim = Simulator::new(cfg).map_err(|source| RunError::Sim {
            block: block.name.clone(),
            source,
        })?;
        let k = sim.encoder().n_info();
        if !opts.quiet {
            eprintln!(
                "[{}] {} x {} code, K = {}, {} points",
                block.name,
                sim.code().n_checks(),
                sim.code().n_bits(),
                k,
                sim.config().snr_db.len()
            );
        }

        let csv = out_dir.join(format!("{}.csv", block.name));
        let partial = out_dir.join(format!("{}.csv.partial", block.name));
        let file = File::create(&partial).map_err(io_err(&partial))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{CSV_HEADER}").map_err(io_err(&partial))?;
        w.flush().map_err(io_err(&partial))?;

        let mut write_err = None;
        let records = sim.sweep(opts.workers, |r| {
            if !opts.quiet {
                eprintln!(
                    "[{}] {:>6} dB  trials {:>8}  frame errors {:>5}  BER {:.3e}  FER {:.3e}  {:.1}s",
                    block.name, r.snr_db, r.trials, r.frame_errors, r.ber, r.fer, r.seconds
                );
            }
            if write_err.is_none() {
                let line = csv_row(r, opts.no_timing);
                if let Err(e) = w.write_all(line.as_bytes()).and_then(|_| w.flush()) {
                    write_err = Some(e);
                }
            }
        });
        if let Some(e) = write_err {
            return Err(io_err(&partial)(e));
        }
        drop(w);
        fs::rename(&partial, &csv).map_err(io_err(&csv))?;

        blocks.push(BlockResult {
            name: block.name.clone(),
            frontend: sim.config().frontend,
            info_bits: k,
            csv,
            records,
        });
    }

    let channels: Vec<_> = exp.blocks.iter().map(|b| b.config.channel).collect();
    let gaps = compute_gaps(&blocks, &channels);
    write_file(&out_dir.join("comparison.dat"), &comparison_data(&blocks))?;
    write_file(&out_dir.join("comparison.gp"), &gnuplot_script(&blocks))?;
    write_file(&out_dir.join("gaps.csv"), &gaps_csv(&gaps))?;
    if !opts.quiet {
        for g in &gaps {
            if let Some(d) = g.gap_db() {
                eprintln!(
                    "gap {} vs {} at BER {:e}: {:.3} dB",
                    g.candidate, g.baseline, g.target_ber, d
                );
            }
        }
    }
    Ok(RunSummary {
        out_dir,
        blocks,
        gaps,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// One CSV line, LF-terminated. Floats use the shortest round-trip form.
pub fn csv_row(r: &BerRecord, no_timing: bool) -> String {
    let seconds = if no_timing { 0.0 } else { r.seconds };
    format!(
        "{},{},{},{},{:e},{:e},{:.3}\n",
        r.snr_db, r.trials, r.bit_errors, r.frame_errors, r.ber, r.fer, seconds
    )
}

/// SNR where a BER curve first falls through `target`, interpolating
/// `log10(BER)` linearly between the two bracketing grid points.
///
/// Returns `None` when the curve starts below the target, never reaches it,
/// or the point after the crossing saw no errors.
pub fn crossing_snr(records: &[BerRecord], target: f64) -> Option<f64> {
    let first = records.first()?;
    if first.ber < target {
        return None;
    }
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.ber >= target && b.ber < target {
            if b.ber <= 0.0 {
                return None;
            }
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}

fn compute_gaps(blocks: &[BlockResult], channels: &[crate::relay_sim::ChannelKind]) -> Vec<Gap> {
    let mut gaps = Vec::new();
    for (i, base) in blocks.iter().enumerate() {
        if base.frontend != Frontend::Mmse {
            continue;
        }
        for (j, cand) in blocks.iter().enumerate() {
            if cand.frontend != Frontend::Jncld || channels[i] != channels[j] {
                continue;
            }
            for target in GAP_TARGETS {
                gaps.push(Gap {
                    baseline: base.name.clone(),
                    candidate: cand.name.clone(),
                    target_ber: target,
                    snr_baseline: crossing_snr(&base.records, target),
                    snr_candidate: crossing_snr(&cand.records, target),
                });
            }
        }
    }
    gaps
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_default()
}

fn gaps_csv(gaps: &[Gap]) -> String {
    let mut s = String::from("baseline,candidate,target_ber,snr_baseline,snr_candidate,gap_db\n");
    for g in gaps {
        let _ = writeln!(
            s,
            "{},{},{:e},{},{},{}",
            g.baseline,
            g.candidate,
            g.target_ber,
            opt(g.snr_baseline),
            opt(g.snr_candidate),
            opt(g.gap_db())
        );
    }
    s
}

/// Gnuplot data: one block per sweep, separated by two blank lines so each is
/// addressable with `index`.
fn comparison_data(blocks: &[BlockResult]) -> String {
    let mut s = String::new();
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# {} (K = {})\n# snr_db ber fer", b.name, b.info_bits);
        for r in &b.records {
            let _ = writeln!(s, "{} {:e} {:e}", r.snr_db, r.ber, r.fer);
        }
    }
    s
}

fn gnuplot_script(blocks: &[BlockResult]) -> String {
    let mut s = String::from(
        "set logscale y\nset format y \"10^{%L}\"\nset xlabel \"SNR (dB)\"\nset ylabel \"BER\"\nset grid\nset key bottom left\n",
    );
    let curves: Vec<String> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| format!("'comparison.dat' index {i} using 1:($2 > 0 ? $2 : 1/0) with linespoints title '{}'", b.name))
        .collect();
    let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    s
}

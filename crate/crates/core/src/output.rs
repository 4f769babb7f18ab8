//! Result files of a campaign run.
//!
//! Each file is written to a temporary file in the output directory and
//! renamed into place, so an interrupted run never leaves a truncated file
//! under the final name. Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harness::{CampaignOutput, CENTRAL_CELL};
use crate::link::linear_to_db;

pub const RAW_FILE: &str = "raw.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CCDF_FILE: &str = "ccdf.csv";
pub const SEEDS_FILE: &str = "seeds.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

pub const RAW_HEADER: &str = "drop_id,method,n_antennas,cell,user,pilot,sinr_dl_db,sinr_ul_db,rate_dl_bps,rate_ul_bps,rate_total_bps";

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_error(path))?;
    tmp.write_all(contents.as_bytes()).map_err(io_error(path))?;
    tmp.as_file().sync_all().map_err(io_error(path))?;
    tmp.persist(path).map_err(|e| io_error(path)(e.error))?;
    Ok(())
}

pub fn raw_csv(output: &CampaignOutput) -> String {
    let mut s = String::from(RAW_HEADER);
    s.push('\n');
    for r in &output.results {
        for u in &r.records {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.drop_id,
                r.method,
                r.antennas,
                CENTRAL_CELL,
                u.user,
                u.pilot,
                linear_to_db(u.dl_sinr),
                linear_to_db(u.ul_sinr),
                u.dl_rate,
                u.ul_rate,
                u.total_rate
            )
            .expect("writing to a String");
        }
    }
    s
}

pub fn summary_csv(output: &CampaignOutput) -> String {
    let mut s = String::from("method,n_antennas,link,samples,mean_bps,likely_95_bps\n");
    for st in &output.statistics {
        let likely = st.likely_95.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{}",
            st.method,
            st.antennas,
            st.kind.name(),
            st.samples,
            st.mean,
            likely
        )
        .expect("writing to a String");
    }
    s
}

pub fn ccdf_csv(output: &CampaignOutput) -> String {
    let mut s = String::from("method,n_antennas,link,rate_bps,ccdf\n");
    for st in &output.statistics {
        for (rate, p) in &st.ccdf {
            writeln!(s, "{},{},{},{},{}", st.method, st.antennas, st.kind.name(), rate, p)
                .expect("writing to a String");
        }
    }
    s
}

pub fn seeds_csv(output: &CampaignOutput) -> String {
    let mut s = String::from("drop_id,seed\n");
    let mut last = None;
    for r in &output.results {
        if last != Some(r.drop_id) {
            writeln!(s, "{},{}", r.drop_id, r.seed).expect("writing to a String");
            last = Some(r.drop_id);
        }
    }
    s
}

/// Per drop and method: best-response rounds used, power-control residual
/// and whether all powers stayed within their ceilings.
pub fn diagnostics_csv(output: &CampaignOutput) -> String {
    let mut s = String::from("drop_id,method,n_antennas,pa_rounds,pc_residual,powers_in_bounds\n");
    for r in &output.results {
        let residual = r.pc_residual.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.drop_id, r.method, r.antennas, r.pa_rounds, residual, r.powers_in_bounds
        )
        .expect("writing to a String");
    }
    s
}

pub fn manifest_toml(config: &RunConfig) -> String {
    format!(
        "# pilotsim {}\n{}",
        env!("CARGO_PKG_VERSION"),
        config.filled().to_toml()
    )
}

/// Writes every result file into `out_dir`, creating it if needed, and
/// returns the written paths.
pub fn emit_results(out_dir: &Path, config: &RunConfig, output: &CampaignOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let files = [
        (RAW_FILE, raw_csv(output)),
        (SUMMARY_FILE, summary_csv(output)),
        (CCDF_FILE, ccdf_csv(output)),
        (SEEDS_FILE, seeds_csv(output)),
        (DIAGNOSTICS_FILE, diagnostics_csv(output)),
        (MANIFEST_FILE, manifest_toml(config)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = out_dir.join(name);
        write_atomic(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}

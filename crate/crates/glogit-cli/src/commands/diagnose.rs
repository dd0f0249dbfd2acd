//! `glogit diagnose`: Geweke, acf and pacf reports for a stored chain.

use std::path::PathBuf;

use clap::Args;
use glogit::diagnostics::{acf, geweke_z, pacf, GEWEKE_FRAC_FIRST, GEWEKE_FRAC_LAST};

use crate::commands::resolve_out_dir;
use crate::csvio::{read_chain_csv, write_geweke_csv, write_lag_csv};
use crate::error::{CmdError, CmdResult};
use crate::manifest::{file_digest, RunManifest};

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// chain.csv produced by `glogit fit`
    #[arg(long)]
    pub chain: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub max_lag: usize,
    /// Defaults to the directory containing the chain file
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: DiagnoseArgs) -> CmdResult<()> {
    let (names, columns) = read_chain_csv(&args.chain)?;
    let n_draws = columns.first().map(Vec::len).unwrap_or(0);
    if args.max_lag == 0 || 2 * args.max_lag >= n_draws {
        return Err(CmdError::Usage(format!(
            "--max-lag {} is out of range for a chain of {} draws (need 0 < max_lag < draws/2)",
            args.max_lag, n_draws
        )));
    }
    let out_dir = match args.out_dir.clone() {
        Some(d) => resolve_out_dir(Some(d))?,
        None => args
            .chain
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };

    let mut manifest = RunManifest::new("diagnose");
    manifest.input_digest = Some(file_digest(&args.chain)?);
    manifest.flag("chain", args.chain.display().to_string());
    manifest.flag("max_lag", args.max_lag);
    manifest.flag("out_dir", out_dir.display().to_string());

    let mut geweke_rows = Vec::with_capacity(names.len());
    for (name, col) in names.iter().zip(&columns) {
        let z = match geweke_z(col, GEWEKE_FRAC_FIRST, GEWEKE_FRAC_LAST) {
            Ok(z) => z,
            Err(glogit::Error::SeriesTooShort { .. }) => {
                eprintln!("warning: chain too short for a Geweke test on '{name}'");
                f64::NAN
            }
            Err(e) => return Err(e.into()),
        };
        geweke_rows.push((name.clone(), z));
    }
    let acf_cols: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| acf(col, args.max_lag))
        .collect::<Result<_, _>>()?;
    let pacf_cols: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| pacf(col, args.max_lag))
        .collect::<Result<_, _>>()?;

    let geweke_path = out_dir.join("geweke.csv");
    write_geweke_csv(&geweke_path, &geweke_rows)?;
    manifest.record_output(&geweke_path);
    let acf_path = out_dir.join("acf.csv");
    write_lag_csv(&acf_path, &names, &acf_cols)?;
    manifest.record_output(&acf_path);
    let pacf_path = out_dir.join("pacf.csv");
    write_lag_csv(&pacf_path, &names, &pacf_cols)?;
    manifest.record_output(&pacf_path);
    manifest.write(&out_dir)?;

    let worst = geweke_rows
        .iter()
        .map(|(_, z)| z.abs())
        .fold(f64::NAN, f64::max);
    println!(
        "diagnose: {} parameters, max |geweke z| = {:.3}; outputs in {}",
        names.len(),
        worst,
        out_dir.display()
    );
    Ok(())
}

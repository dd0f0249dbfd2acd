//! CSV ingestion and emission. All numbers are written with Rust's
//! shortest-round-trip float formatting, so files re-parse to the exact
//! same f64 bit patterns.

use std::io::Write;
use std::path::Path;

use glogit::diagnostics::PosteriorSummary;
use glogit::{Chain, Dataset};
use nalgebra::DMatrix;

use crate::error::{CmdError, CmdResult};

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn open_writer(path: &Path) -> CmdResult<std::io::BufWriter<std::fs::File>> {
    let f = std::fs::File::create(path)
        .map_err(|e| CmdError::Io(format!("creating {}: {e}", path.display())))?;
    Ok(std::io::BufWriter::new(f))
}

fn finish(mut w: std::io::BufWriter<std::fs::File>, path: &Path) -> CmdResult<()> {
    w.flush()
        .map_err(|e| CmdError::Io(format!("writing {}: {e}", path.display())))
}

/// A parsed numeric CSV: header plus row-major cells.
pub struct NumericTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Read a UTF-8 CSV with a header row and all-numeric cells. Parse errors
/// name the offending 1-based data row and the column.
pub fn read_numeric_csv(path: &Path) -> CmdResult<NumericTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CmdError::Io(format!("opening {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CmdError::Io(format!("reading header of {}: {e}", path.display())))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if headers.is_empty() {
        return Err(CmdError::Io(format!("{}: empty file", path.display())));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CmdError::Io(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        if record.len() != headers.len() {
            return Err(CmdError::Io(format!(
                "{}: row {} has {} cells, expected {}",
                path.display(),
                i + 1,
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len());
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                CmdError::Io(format!(
                    "{}: row {}, column '{}': cannot parse '{}' as a number",
                    path.display(),
                    i + 1,
                    headers[j],
                    cell
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CmdError::Io(format!(
            "{}: no data rows (empty dataset)",
            path.display()
        )));
    }
    Ok(NumericTable { headers, rows })
}

/// Split a numeric table into a [`Dataset`] given the response column name,
/// optionally prepending an intercept column of ones. Returns the dataset
/// plus the covariate names aligned with the β indices.
pub fn dataset_from_table(
    table: &NumericTable,
    response: &str,
    add_intercept: bool,
) -> CmdResult<(Dataset, Vec<String>)> {
    let resp_idx = table
        .headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| {
            CmdError::Usage(format!(
                "response column '{response}' not found; columns are: {}",
                table.headers.join(", ")
            ))
        })?;
    let n = table.rows.len();
    let mut y = Vec::with_capacity(n);
    for (i, row) in table.rows.iter().enumerate() {
        let v = row[resp_idx];
        if v == 0.0 {
            y.push(0u8);
        } else if v == 1.0 {
            y.push(1u8);
        } else {
            return Err(CmdError::Usage(format!(
                "non-binary response at row {}: '{response}' must be 0 or 1, got {v}",
                i + 1
            )));
        }
    }
    let covariate_idx: Vec<usize> =
        (0..table.headers.len()).filter(|&j| j != resp_idx).collect();
    let k = covariate_idx.len() + usize::from(add_intercept);
    if k == 0 {
        return Err(CmdError::Usage(
            "no covariate columns (use the intercept or provide covariates)".into(),
        ));
    }
    let mut x = DMatrix::zeros(n, k);
    let mut names = Vec::with_capacity(k);
    let mut col = 0;
    if add_intercept {
        for i in 0..n {
            x[(i, 0)] = 1.0;
        }
        names.push("(intercept)".to_string());
        col = 1;
    }
    for &j in &covariate_idx {
        for i in 0..n {
            x[(i, col)] = table.rows[i][j];
        }
        names.push(table.headers[j].clone());
        col += 1;
    }
    let data = Dataset::new(x, y).map_err(CmdError::from)?;
    Ok((data, names))
}

/// Write a simulated dataset as `y,x0,x1,…` (x0 is the intercept ones).
pub fn write_dataset_csv(path: &Path, data: &Dataset) -> CmdResult<()> {
    let mut w = open_writer(path)?;
    let cols: Vec<String> = (0..data.k()).map(|j| format!("x{j}")).collect();
    let _ = writeln!(w, "y,{}", cols.join(","));
    for i in 0..data.n() {
        let mut line = String::with_capacity(data.k() * 20 + 2);
        line.push_str(if data.y()[i] == 1 { "1" } else { "0" });
        for j in 0..data.k() {
            line.push(',');
            line.push_str(&fmt_f64(data.x()[(i, j)]));
        }
        let _ = writeln!(w, "{line}");
    }
    finish(w, path)
}

/// Write stored draws as `iter,beta_0..beta_{k−1},p`.
pub fn write_chain_csv(path: &Path, chain: &Chain) -> CmdResult<()> {
    let mut w = open_writer(path)?;
    let beta_cols: Vec<String> = (0..chain.k()).map(|j| format!("beta_{j}")).collect();
    let _ = writeln!(w, "iter,{},p", beta_cols.join(","));
    for i in 0..chain.len() {
        let mut line = chain.iters()[i].to_string();
        for &b in chain.beta_row(i) {
            line.push(',');
            line.push_str(&fmt_f64(b));
        }
        line.push(',');
        line.push_str(&fmt_f64(chain.p_draws()[i]));
        let _ = writeln!(w, "{line}");
    }
    finish(w, path)
}

/// Read a chain written by [`write_chain_csv`]: parameter names (header
/// minus `iter`) plus one column of draws per parameter.
pub fn read_chain_csv(path: &Path) -> CmdResult<(Vec<String>, Vec<Vec<f64>>)> {
    let table = read_numeric_csv(path)?;
    if table.headers.first().map(String::as_str) != Some("iter") {
        return Err(CmdError::Io(format!(
            "{}: not a chain file (first column must be 'iter')",
            path.display()
        )));
    }
    let names: Vec<String> = table.headers[1..].to_vec();
    let mut prev = f64::NEG_INFINITY;
    for row in &table.rows {
        if row[0] <= prev {
            return Err(CmdError::Io(format!(
                "{}: iter column is not strictly increasing",
                path.display()
            )));
        }
        prev = row[0];
    }
    let columns: Vec<Vec<f64>> = (1..table.headers.len())
        .map(|j| table.rows.iter().map(|r| r[j]).collect())
        .collect();
    Ok((names, columns))
}

/// `parameter,mean,sd,q2.5,q97.5,geweke_z,ess`.
pub fn write_summary_csv(path: &Path, summary: &PosteriorSummary) -> CmdResult<()> {
    let mut w = open_writer(path)?;
    let _ = writeln!(w, "parameter,mean,sd,q2.5,q97.5,geweke_z,ess");
    for p in &summary.params {
        let _ = writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.name,
            fmt_f64(p.mean),
            fmt_f64(p.sd),
            fmt_f64(p.q2_5),
            fmt_f64(p.q97_5),
            fmt_f64(p.geweke_z),
            fmt_f64(p.ess)
        );
    }
    finish(w, path)
}

/// Aligned plain-text summary table, one row per β entry plus p.
pub fn write_summary_txt(
    path: &Path,
    summary: &PosteriorSummary,
    covariates: &[String],
) -> CmdResult<()> {
    let mut w = open_writer(path)?;
    let _ = writeln!(
        w,
        "{:<10} {:<14} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10}",
        "parameter", "covariate", "post. mean", "sd", "2.50%", "97.50%", "geweke_z", "ess"
    );
    for (i, p) in summary.params.iter().enumerate() {
        let label = covariates.get(i).map(String::as_str).unwrap_or("");
        let _ = writeln!(
            w,
            "{:<10} {:<14} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>10.3} {:>10.1}",
            p.name, label, p.mean, p.sd, p.q2_5, p.q97_5, p.geweke_z, p.ess
        );
    }
    let _ = writeln!(w, "\ndraws: {}", summary.n_draws);
    finish(w, path)
}

/// `parameter,z,pass` with pass = |z| < 1.96.
pub fn write_geweke_csv(path: &Path, rows: &[(String, f64)]) -> CmdResult<()> {
    let mut w = open_writer(path)?;
    let _ = writeln!(w, "parameter,z,pass");
    for (name, z) in rows {
        let pass = z.abs() < 1.96;
        let _ = writeln!(w, "{},{},{}", name, fmt_f64(*z), pass);
    }
    finish(w, path)
}

/// `lag,<param…>` with one correlation column per parameter.
pub fn write_lag_csv(path: &Path, names: &[String], series: &[Vec<f64>]) -> CmdResult<()> {
    let mut w = open_writer(path)?;
    let _ = writeln!(w, "lag,{}", names.join(","));
    let max_lag = series.first().map(|s| s.len()).unwrap_or(0);
    for lag in 0..max_lag {
        let mut line = lag.to_string();
        for col in series {
            line.push(',');
            line.push_str(&fmt_f64(col[lag]));
        }
        let _ = writeln!(w, "{line}");
    }
    finish(w, path)
}

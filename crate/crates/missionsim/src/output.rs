//! CSV and JSON writers for CLI products.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::SimResult;
use crate::flyby::{ManeuverPoint, StepLog};
use crate::montecarlo::EnvelopeRow;
use crate::scenario::TruthSample;
use crate::screening::ScreenRow;
use crate::validation::ValidationReport;

/// Pretty JSON with a trailing newline. Float formatting is shortest
/// round-trip, so identical values give identical bytes.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> SimResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> SimResult<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_filter_log(path: &Path, log: &[StepLog], truth: &[TruthSample]) -> SimResult<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string(), "range_true".into(), "range_err".into(), "range_3sigma".into()];
    for name in ["dtheta", "dp", "dxi_x", "dxi_y", "dh_x", "dh_y"] {
        header.push(format!("{name}_hat"));
        header.push(format!("{name}_err"));
        header.push(format!("{name}_3sigma"));
    }
    header.extend(["zeta_hat", "zeta_3sigma", "nu_az", "nu_el", "nu_beta", "nees", "outlier"].map(String::from));
    w.write_record(&header)?;
    for (s, tr) in log.iter().zip(truth) {
        let mut rec = vec![fmt(s.t), fmt(tr.dr.norm()), fmt(s.range_err), fmt(s.range_3sigma)];
        let x = s.oe_hat.to_vector();
        for i in 0..6 {
            rec.extend([fmt(x[i]), fmt(s.err[i]), fmt(s.three_sigma[i])]);
        }
        rec.extend([fmt(s.zeta_hat), fmt(s.zeta_3sigma)]);
        rec.extend(s.innovation.iter().map(|&v| fmt(v)));
        rec.extend([fmt(s.nees), u8::from(s.outlier).to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_envelopes(path: &Path, rows: &[EnvelopeRow]) -> SimResult<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..6).map(|i| format!("true_sigma_{i}")));
    header.extend((0..6).map(|i| format!("filter_sigma_{i}")));
    header.extend(["range_err_sigma", "range_filter_sigma", "mean_nees", "zeta_contains_zero"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![fmt(r.t)];
        rec.extend(r.true_sigma.iter().chain(&r.filter_sigma).map(|&v| fmt(v)));
        rec.extend([r.range_err_sigma, r.range_filter_sigma, r.mean_nees, r.zeta_contains_zero].map(fmt));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_screening(path: &Path, rows: &[ScreenRow]) -> SimResult<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, points: &[ManeuverPoint]) -> SimResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "zeta_hat", "zeta_3sigma", "delta_zeta", "dv_r", "dv_t", "dv_n", "dv_norm"])?;
    for p in points {
        let rec = [p.t, p.zeta_hat, p.zeta_3sigma, p.delta_zeta, p.delta_v[0], p.delta_v[1], p.delta_v[2], p.dv_norm];
        w.write_record(rec.map(fmt))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation(path: &Path, report: &ValidationReport) -> SimResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "model_r", "model_t", "model_n", "cowell_r", "cowell_t", "cowell_n", "error"])?;
    for (t, m, c) in &report.rows {
        let rec = [*t, m[0], m[1], m[2], c[0], c[1], c[2], (m - c).norm()];
        w.write_record(rec.map(fmt))?;
    }
    w.flush()?;
    Ok(())
}

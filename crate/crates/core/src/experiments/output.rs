//! CSV and gnuplot emission. Every float is written with Rust's shortest
//! round-trip formatting so reruns are byte-identical.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::run::ScenarioResult;
use super::scenario::Output;
use super::tables::TheoryTable;
use crate::error::Result;

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

pub fn write_theory_csv(table: &TheoryTable, path: &Path) -> Result<()> {
    write_theory(table, File::create(path)?)
}

pub fn write_theory<W: Write>(table: &TheoryTable, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    match table {
        TheoryTable::Subcritical(rows) => {
            w.write_record(["d", "c_exact", "c_asym", "M", "M_asym", "dnn_theory", "dnn_asym", "ratio"])?;
            for r in rows {
                w.write_record([
                    r.d.to_string(),
                    num(r.c_exact),
                    num(r.c_asym),
                    num(r.m_exact),
                    num(r.m_asym),
                    num(r.dnn_theory),
                    num(r.dnn_asym),
                    num(r.ratio()),
                ])?;
            }
        }
        TheoryTable::Hypothesis { n_list, rows, .. } => {
            let mut header = vec!["d".to_string(), "c_exact".to_string()];
            header.extend(n_list.iter().map(|n| format!("hypothesis_n{n}")));
            w.write_record(&header)?;
            for r in rows {
                let mut rec = vec![r.d.to_string(), num(r.c_exact)];
                rec.extend(r.values.iter().map(|&v| num(v)));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the requested CSVs plus `raw.csv` and `summary.json` into `dir`.
/// Returns the paths written, in a fixed order.
pub fn write_result(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let s = &result.scenario;
    let mut written = Vec::new();
    for &o in &s.outputs {
        let path = dir.join(format!("{}.csv", o.file_stem()));
        match o {
            Output::DnnVsD => {
                let mut w = writer(
                    &path,
                    &["label", "n", "d", "N_pooled", "seeds", "dnn_mean", "dnn_stderr", "dnn_pooled", "theory"],
                )?;
                for v in &result.variants {
                    for c in &v.cells {
                        for p in c.curve.iter().filter(|p| p.pooled_count >= s.support_threshold) {
                            w.write_record([
                                num(v.label),
                                c.n.to_string(),
                                p.d.to_string(),
                                p.pooled_count.to_string(),
                                p.seeds_present.to_string(),
                                num(p.mean),
                                opt(p.stderr),
                                num(p.pooled),
                                opt(p.theory),
                            ])?;
                        }
                    }
                }
                w.flush()?;
            }
            Output::ErrVsN | Output::DnnVsN | Output::DnnVsSweep => {
                let mut w = writer(
                    &path,
                    &["label", "n", "d0", "dnn_mean", "dnn_stderr", "theory", "err", "seed_err", "seed_err_stderr"],
                )?;
                for v in &result.variants {
                    for c in &v.cells {
                        let p = &c.probe;
                        w.write_record([
                            num(v.label),
                            c.n.to_string(),
                            p.d0.to_string(),
                            num(p.mean),
                            opt(p.stderr),
                            opt(p.theory),
                            opt(p.err),
                            opt(p.seed_err),
                            opt(p.seed_err_stderr),
                        ])?;
                    }
                }
                w.flush()?;
            }
            Output::Clustering => {
                let mut w = writer(&path, &["label", "n", "d", "N_pooled", "C_mean", "d_times_C", "limit"])?;
                for v in &result.variants {
                    let p = v.params;
                    let limit = 2.0 * p.d() / (p.a() * p.m_f64());
                    for c in &v.cells {
                        for &(d, cd, count) in c.clustering.iter().filter(|r| r.2 >= s.support_threshold) {
                            w.write_record([
                                num(v.label),
                                c.n.to_string(),
                                d.to_string(),
                                count.to_string(),
                                num(cd),
                                num(d as f64 * cd),
                                num(limit),
                            ])?;
                        }
                    }
                }
                w.flush()?;
            }
            Output::DegreeCcdf => {
                let mut w = writer(&path, &["label", "n", "d", "ccdf", "tail_count"])?;
                for v in &result.variants {
                    for c in &v.cells {
                        for &(d, f, tail) in &c.ccdf {
                            w.write_record([num(v.label), c.n.to_string(), d.to_string(), num(f), tail.to_string()])?;
                        }
                    }
                }
                w.flush()?;
            }
            Output::TheoryOnly => continue,
        }
        written.push(path);
    }

    let path = dir.join("raw.csv");
    let mut w = writer(&path, &["label", "n", "seed", "dnn_d0", "N_d0", "W", "max_degree", "triangles"])?;
    for r in &result.raw {
        w.write_record([
            num(r.label),
            r.n.to_string(),
            r.seed.to_string(),
            opt(r.dnn_d0),
            r.count_d0.to_string(),
            r.w.to_string(),
            r.max_degree.to_string(),
            r.triangles.map(|t| t.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("summary.json");
    let mut f = File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, &summary(result))?;
    writeln!(f)?;
    written.push(path);
    Ok(written)
}

fn summary(result: &ScenarioResult) -> serde_json::Value {
    let variants: Vec<_> = result
        .variants
        .iter()
        .map(|v| {
            let cells: Vec<_> = v
                .cells
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "n": c.n,
                        "probe": c.probe,
                        "W_mean": c.w_mean,
                        "W_stderr": c.w_stderr,
                        "W_theory": c.w_theory,
                        "d_slope": c.d_slope,
                        "ccdf_slope": c.ccdf_slope,
                    })
                })
                .collect();
            serde_json::json!({
                "label": v.label,
                "params": v.params,
                "n_slope": v.n_slope,
                "ln_n_correlation": v.ln_n_correlation,
                "cells": cells,
            })
        })
        .collect();
    serde_json::json!({
        "scenario": result.scenario,
        "variants": variants,
        "sweep_fit": result.sweep_fit,
        "hypothesis": result.hypothesis,
    })
}

/// A gnuplot script for one output file, or `None` where no plot makes
/// sense.
pub fn gnuplot_script(name: &str, output: Output) -> Option<String> {
    let stem = output.file_stem();
    let body = match output {
        Output::DnnVsD => format!(
            "set logscale x\nset xlabel 'd'\nset ylabel 'd_nn(d)'\n\
             plot '{stem}.csv' using 3:6:7 with yerrorbars title 'simulation', \\\n     \
             '' using 3:9 with lines title 'theory'\n"
        ),
        Output::ErrVsN => format!(
            "set logscale xy\nset xlabel 'n'\nset ylabel 'err(d0)'\n\
             plot for [a in system(\"tail -n +2 {stem}.csv | cut -d, -f1 | sort -u\")] \\\n     \
             '{stem}.csv' using ($1 == a ? $2 : 1/0):7 with linespoints title 'A = '.a\n"
        ),
        Output::DnnVsN => format!(
            "set logscale x\nset xlabel 'n'\nset ylabel 'd_nn(d0)'\n\
             plot '{stem}.csv' using 2:4:5 with yerrorbars title 'simulation', \\\n     \
             '' using 2:6 with lines title 'hypothesis'\n"
        ),
        Output::DnnVsSweep => format!(
            "set xlabel 'D'\nset ylabel 'd_nn(d0)'\nplot '{stem}.csv' using 1:4:5 with yerrorbars title 'simulation'\n"
        ),
        Output::Clustering => format!(
            "set logscale xy\nset xlabel 'd'\nset ylabel 'C(d)'\n\
             plot '{stem}.csv' using 3:5 with points title 'simulation', \\\n     \
             '' using 3:($7/$3) with lines title '2D/(Am) / d'\n"
        ),
        Output::DegreeCcdf => format!(
            "set logscale xy\nset xlabel 'd'\nset ylabel 'P(deg >= d)'\nplot '{stem}.csv' using 3:4 with lines title 'CCDF'\n"
        ),
        Output::TheoryOnly => format!(
            "set logscale x\nset xlabel 'd'\nset ylabel 'd_nn(d)'\n\
             plot '{stem}.csv' using 1:6 with lines title 'exact', '' using 1:7 with lines title 'asymptotic'\n"
        ),
    };
    Some(format!(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 800,600\n\
         set output '{name}_{stem}.png'\n{body}"
    ))
}

pub fn write_gnuplot(name: &str, outputs: &[Output], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for &o in outputs {
        if let Some(script) = gnuplot_script(name, o) {
            let path = dir.join(format!("{}.gp", o.file_stem()));
            std::fs::write(&path, script)?;
            written.push(path);
        }
    }
    Ok(written)
}

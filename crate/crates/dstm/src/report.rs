//! Evaluation reports: per-trial CSV, summary CSV and a plain-text table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dstm_core::eval::{ComparisonReport, TTestFlag, TrialResult};

use crate::{Error, Result};

/// One row per (model, trial, epoch).
pub fn trials_csv(results: &[TrialResult]) -> String {
    let mut out = String::from("model,trial,split_seed,epoch,ppl\n");
    for r in results {
        for (t, ppl) in r.per_epoch.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{},{}", r.model, r.trial, r.split_seed, t + 1, ppl);
        }
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn flag_name(f: TTestFlag) -> &'static str {
    match f {
        TTestFlag::Regular => "",
        TTestFlag::ZeroVariance => "zero_variance",
        TTestFlag::AllZero => "all_zero",
    }
}

pub fn summary_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("model,K,S,trials,mean,std_trials,std_epochs,t,p,flag\n");
    for m in &report.models {
        let (t, p, flag) = match &m.vs_reference {
            Some(tt) => (tt.t.to_string(), tt.p_value.to_string(), flag_name(tt.flag)),
            None => (String::new(), String::new(), ""),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            m.model,
            m.num_topics,
            m.num_supertopics,
            m.trials,
            m.mean,
            opt(m.std_across_trials),
            opt(m.std_across_epochs),
            t,
            p,
            flag
        );
    }
    out
}

/// Human-readable table. With a single trial the spread and test columns
/// are left out and a notice says so.
pub fn summary_table(report: &ComparisonReport) -> String {
    let single = report.models.iter().all(|m| m.trials < 2);
    let mut out = String::new();
    if single {
        let _ = writeln!(out, "{:<20} {:>4} {:>4} {:>12}", "model", "K", "S", "mean PPL");
        for m in &report.models {
            let _ = writeln!(out, "{:<20} {:>4} {:>4} {:>12.3}", m.model, m.num_topics, m.num_supertopics, m.mean);
        }
        out.push_str("note: only one trial; standard deviations and t-tests omitted\n");
        return out;
    }
    let reference = report.reference.as_deref().unwrap_or("-");
    let _ = writeln!(
        out,
        "{:<20} {:>4} {:>4} {:>12} {:>11} {:>11} {:>9} {:>11}",
        "model", "K", "S", "mean PPL", "sd(trials)", "sd(epochs)", "t", format!("p vs {reference}")
    );
    for m in &report.models {
        let sd = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        let (t, p) = match &m.vs_reference {
            Some(tt) => {
                let mark = match tt.flag {
                    TTestFlag::Regular => "",
                    TTestFlag::ZeroVariance => "*",
                    TTestFlag::AllZero => "**",
                };
                (format!("{:.3}", tt.t), format!("{:.3e}{mark}", tt.p_value))
            }
            None => ("-".into(), "-".into()),
        };
        let _ = writeln!(
            out,
            "{:<20} {:>4} {:>4} {:>12.3} {:>11} {:>11} {:>9} {:>11}",
            m.model,
            m.num_topics,
            m.num_supertopics,
            m.mean,
            sd(m.std_across_trials),
            sd(m.std_across_epochs),
            t,
            p
        );
    }
    out.push_str("sd(trials): spread of epoch-averaged PPL over trials; sd(epochs): mean spread over epochs within a trial\n");
    if report.models.iter().any(|m| m.vs_reference.is_some_and(|t| t.flag != TTestFlag::Regular)) {
        out.push_str("* zero variance of differences (p set to 0); ** identical results (p set to 1)\n");
    }
    out
}

pub fn write_reports(results: &[TrialResult], report: &ComparisonReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in [
        ("trials.csv", trials_csv(results)),
        ("summary.csv", summary_csv(report)),
        ("summary.txt", summary_table(report)),
    ] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

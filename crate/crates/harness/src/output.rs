//! CSV traces and the text report.
//!
//! Numbers are written like C's `%.12e` so reruns diff byte-for-byte.

use std::collections::HashMap;
use std::path::Path;

use usc_core::StreamClass;

use crate::comparator::ComparatorResult;
use crate::error::{HarnessError, Result};
use crate::run::{LearnerInfo, RunData};
use crate::verify::Report;

pub const TRACE_FILE: &str = "trace.csv";
pub const EXPERTS_FILE: &str = "experts.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const INFO_FILE: &str = "run_info.csv";
pub const REPORT_FILE: &str = "report.txt";

/// `%.12e`: twelve mantissa digits, signed exponent of at least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<std::fs::File>> {
    let path = dir.join(name);
    csv::Writer::from_path(&path).map_err(|e| HarnessError::csv(path, e))
}

fn finish(mut w: csv::Writer<std::fs::File>, dir: &Path, name: &str) -> Result<()> {
    w.flush().map_err(|e| HarnessError::io(dir.join(name), e))
}

macro_rules! row {
    ($w:expr, $dir:expr, $name:expr, $rec:expr) => {
        $w.write_record($rec).map_err(|e| HarnessError::csv($dir.join($name), e))?
    };
}

pub fn write_run(dir: &Path, d: &RunData, comparator: Option<&ComparatorResult>, report: &Report) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_trace(dir, d)?;
    write_experts(dir, d)?;
    write_summary(dir, d)?;
    write_info(dir, d, comparator)?;
    write_report(dir, d, report)
}

pub fn write_report(dir: &Path, d: &RunData, report: &Report) -> Result<()> {
    let mut text = format!(
        "class={} T={} |E|={} seed={}\nusc_regret={}\ncomparator_loss={}\n",
        d.class,
        d.horizon(),
        d.experts.len(),
        d.seed,
        sci(d.usc_regret()),
        sci(d.comparator_total()),
    );
    text.push_str(&report.to_string());
    text.push_str(if report.all_passed() { "RESULT PASS\n" } else { "RESULT FAIL\n" });
    let path = dir.join(REPORT_FILE);
    std::fs::write(&path, text).map_err(|e| HarnessError::io(path, e))
}

fn write_trace(dir: &Path, d: &RunData) -> Result<()> {
    let mut w = writer(dir, TRACE_FILE)?;
    row!(
        w,
        dir,
        TRACE_FILE,
        ["t", "usc_loss", "usc_cumregret", "grad_norm", "weight_entropy", "top_expert_id", "top_expert_weight"]
    );
    for (t, cum) in d.usc_cumregret().into_iter().enumerate() {
        let p = &d.weights[t];
        let mut top = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[top] {
                top = i;
            }
        }
        let entropy = -p.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum::<f64>();
        row!(
            w,
            dir,
            TRACE_FILE,
            [
                (t + 1).to_string(),
                sci(d.usc_loss[t]),
                sci(cum),
                sci(d.grad_norm[t]),
                sci(entropy),
                top.to_string(),
                sci(p[top]),
            ]
        );
    }
    finish(w, dir, TRACE_FILE)
}

fn write_experts(dir: &Path, d: &RunData) -> Result<()> {
    let mut w = writer(dir, EXPERTS_FILE)?;
    let mut header: Vec<String> =
        ["t", "meta_lin", "comparator_loss", "variation", "gradient_queries"].map(String::from).to_vec();
    for i in 0..d.experts.len() {
        header.extend([format!("e{i}_loss"), format!("e{i}_lin"), format!("e{i}_w")]);
    }
    header.extend((0..d.baselines.len()).map(|j| format!("b{j}_loss")));
    row!(w, dir, EXPERTS_FILE, &header);
    for t in 0..d.horizon() {
        let mut rec = vec![
            (t + 1).to_string(),
            sci(d.meta_lin[t]),
            sci(d.comparator_loss[t]),
            sci(d.variation[t]),
            d.gradient_queries[t].to_string(),
        ];
        for i in 0..d.experts.len() {
            rec.extend([sci(d.expert_loss[t][i]), sci(d.expert_lin[t][i]), sci(d.weights[t][i])]);
        }
        rec.extend(d.baseline_loss[t].iter().map(|v| sci(*v)));
        row!(w, dir, EXPERTS_FILE, &rec);
    }
    finish(w, dir, EXPERTS_FILE)
}

fn write_summary(dir: &Path, d: &RunData) -> Result<()> {
    let mut w = writer(dir, SUMMARY_FILE)?;
    row!(w, dir, SUMMARY_FILE, ["learner", "kind", "block", "algorithm", "param", "cum_loss", "regret"]);
    let comp = d.comparator_total();
    let total = d.usc_loss.iter().sum::<f64>();
    row!(w, dir, SUMMARY_FILE, ["USC", "usc", "-", "USC", &sci(0.0), &sci(total), &sci(total - comp)]);
    for (i, e) in d.experts.iter().enumerate() {
        let r = d.expert_regret(i);
        let block = e.block.map_or("-", |b| b.as_str());
        row!(
            w,
            dir,
            SUMMARY_FILE,
            [e.name.as_str(), "expert", block, &e.algorithm, &sci(e.param), &sci(r + comp), &sci(r)]
        );
    }
    for (j, b) in d.baselines.iter().enumerate() {
        let r = d.baseline_regret(j);
        row!(w, dir, SUMMARY_FILE, [b.name.as_str(), "baseline", "-", &b.algorithm, &sci(b.param), &sci(r + comp), &sci(r)]);
    }
    finish(w, dir, SUMMARY_FILE)
}

fn write_info(dir: &Path, d: &RunData, comparator: Option<&ComparatorResult>) -> Result<()> {
    let mut w = writer(dir, INFO_FILE)?;
    row!(w, dir, INFO_FILE, ["key", "value"]);
    let point = d.comparator_point.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(" ");
    let mut pairs = vec![
        ("class", d.class.as_str().to_string()),
        ("true_parameter", sci(d.true_parameter)),
        ("grad_bound", sci(d.grad_bound)),
        ("diameter", sci(d.diameter)),
        ("dim", d.dim.to_string()),
        ("seed", d.seed.to_string()),
        ("horizon", d.horizon().to_string()),
        ("smoothness", sci(d.smoothness)),
        ("num_experts", d.experts.len().to_string()),
        ("num_baselines", d.baselines.len().to_string()),
        ("comparator_point", point),
        ("comparator_loss", sci(d.comparator_total())),
        ("comparator_gradient_mapping", sci(d.comparator_gradient_mapping)),
        ("gamma", match d.experts.len() {
            n if n >= 2 => sci(usc_core::gamma_constant(n, d.horizon().max(1)).expect("n ≥ 2")),
            _ => "-".into(),
        }),
    ];
    if let Some(g) = comparator.and_then(|c| c.grid.as_ref()) {
        pairs.push(("grid_check_distance", sci(g.distance)));
        pairs.push(("grid_check_loss", sci(g.loss)));
    }
    for (k, v) in pairs {
        row!(w, dir, INFO_FILE, [k, v.as_str()]);
    }
    finish(w, dir, INFO_FILE)
}

// ---- reading back ----

fn reader(dir: &Path, name: &str) -> Result<csv::Reader<std::fs::File>> {
    let path = dir.join(name);
    csv::Reader::from_path(&path).map_err(|e| HarnessError::csv(path, e))
}

fn num(dir: &Path, name: &str, what: &str, s: &str) -> Result<f64> {
    let v = match s {
        "nan" => f64::NAN,
        "inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => s.trim().parse::<f64>().map_err(|_| HarnessError::trace(dir.join(name), format!("{what}: bad number {s:?}")))?,
    };
    Ok(v)
}

struct Table {
    header: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn load(dir: &Path, name: &str) -> Result<Self> {
        let mut r = reader(dir, name)?;
        let header = r
            .headers()
            .map_err(|e| HarnessError::csv(dir.join(name), e))?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let rows = r
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::csv(dir.join(name), e))?;
        Ok(Table { header, rows })
    }

    fn col(&self, dir: &Path, name: &str, column: &str) -> Result<usize> {
        self.header
            .get(column)
            .copied()
            .ok_or_else(|| HarnessError::trace(dir.join(name), format!("missing column {column}")))
    }

    fn floats(&self, dir: &Path, name: &str, column: &str) -> Result<Vec<f64>> {
        let c = self.col(dir, name, column)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(t, r)| num(dir, name, &format!("row {} {column}", t + 1), r.get(c).unwrap_or("")))
            .collect()
    }
}

/// Reconstructs a run from the files [`write_run`] produced.
pub fn read_run(dir: &Path) -> Result<RunData> {
    let info_tab = Table::load(dir, INFO_FILE)?;
    let info: HashMap<String, String> =
        info_tab.rows.iter().map(|r| (r.get(0).unwrap_or("").to_string(), r.get(1).unwrap_or("").to_string())).collect();
    let get = |k: &str| {
        info.get(k).ok_or_else(|| HarnessError::trace(dir.join(INFO_FILE), format!("missing key {k}")))
    };
    let getf = |k: &str| -> Result<f64> { num(dir, INFO_FILE, k, get(k)?) };
    let geti = |k: &str| -> Result<u64> {
        get(k)?.parse::<u64>().map_err(|_| HarnessError::trace(dir.join(INFO_FILE), format!("{k}: not an integer")))
    };
    let class: StreamClass =
        get("class")?.parse().map_err(|e: usc_core::Error| HarnessError::trace(dir.join(INFO_FILE), e.to_string()))?;

    let summary = Table::load(dir, SUMMARY_FILE)?;
    let (c_name, c_kind, c_block, c_alg, c_param) = (
        summary.col(dir, SUMMARY_FILE, "learner")?,
        summary.col(dir, SUMMARY_FILE, "kind")?,
        summary.col(dir, SUMMARY_FILE, "block")?,
        summary.col(dir, SUMMARY_FILE, "algorithm")?,
        summary.col(dir, SUMMARY_FILE, "param")?,
    );
    let mut experts = Vec::new();
    let mut baselines = Vec::new();
    for r in &summary.rows {
        let field = |c: usize| r.get(c).unwrap_or("").to_string();
        let block = match field(c_block).as_str() {
            "-" => None,
            b => Some(
                b.parse::<StreamClass>()
                    .map_err(|e| HarnessError::trace(dir.join(SUMMARY_FILE), e.to_string()))?,
            ),
        };
        let info = LearnerInfo {
            name: field(c_name),
            block,
            algorithm: field(c_alg),
            param: num(dir, SUMMARY_FILE, "param", &field(c_param))?,
        };
        match field(c_kind).as_str() {
            "expert" => experts.push(info),
            "baseline" => baselines.push(info),
            _ => {}
        }
    }

    let trace = Table::load(dir, TRACE_FILE)?;
    let usc_loss = trace.floats(dir, TRACE_FILE, "usc_loss")?;
    let grad_norm = trace.floats(dir, TRACE_FILE, "grad_norm")?;

    let ex = Table::load(dir, EXPERTS_FILE)?;
    let horizon = usc_loss.len();
    if ex.rows.len() != horizon {
        return Err(HarnessError::trace(
            dir.join(EXPERTS_FILE),
            format!("{} rows but {TRACE_FILE} has {horizon}", ex.rows.len()),
        ));
    }
    let per_expert = |suffix: &str| -> Result<Vec<Vec<f64>>> {
        let cols = (0..experts.len())
            .map(|i| ex.floats(dir, EXPERTS_FILE, &format!("e{i}_{suffix}")))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..horizon).map(|t| cols.iter().map(|c| c[t]).collect()).collect())
    };
    let baseline_cols = (0..baselines.len())
        .map(|j| ex.floats(dir, EXPERTS_FILE, &format!("b{j}_loss")))
        .collect::<Result<Vec<_>>>()?;

    let point = get("comparator_point")?
        .split_whitespace()
        .map(|s| num(dir, INFO_FILE, "comparator_point", s))
        .collect::<Result<Vec<f64>>>()?;

    Ok(RunData {
        class,
        true_parameter: getf("true_parameter")?,
        grad_bound: getf("grad_bound")?,
        diameter: getf("diameter")?,
        dim: geti("dim")? as usize,
        seed: geti("seed")?,
        smoothness: getf("smoothness")?,
        comparator_point: point,
        comparator_gradient_mapping: getf("comparator_gradient_mapping")?,
        usc_loss,
        comparator_loss: ex.floats(dir, EXPERTS_FILE, "comparator_loss")?,
        grad_norm,
        meta_lin: ex.floats(dir, EXPERTS_FILE, "meta_lin")?,
        variation: ex.floats(dir, EXPERTS_FILE, "variation")?,
        gradient_queries: ex.floats(dir, EXPERTS_FILE, "gradient_queries")?.into_iter().map(|v| v as usize).collect(),
        expert_loss: per_expert("loss")?,
        expert_lin: per_expert("lin")?,
        weights: per_expert("w")?,
        baseline_loss: (0..horizon).map(|t| baseline_cols.iter().map(|c| c[t]).collect()).collect(),
        experts,
        baselines,
    })
}

//! Table and curve files derived from a [`RunSummary`].
//!
//! Everything here is a pure function of the summary, so re-rendering a
//! stored `run.json` reproduces the files byte for byte.

use qkswap_core::evaluation::{roc_curve, ModelSummary, RunSummary};
use qkswap_core::numfmt::fmt_sig;
use qkswap_core::{Label, Result};

pub const TABLE2_HEADER: &str = "dataset,model,family,accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std,eer_mean,eer_std,eer_pooled,fpr_mean,fpr_std";
pub const TABLE3_HEADER: &str = "dataset,model,margin,separability,security";
pub const TABLE4_HEADER: &str = "dataset,model_a,model_b,delta_eer,delta_fpr,t,df,p,cohens_d,effect";

/// A rendered output file: name relative to the run directory, and contents.
pub type Rendered = (String, String);

fn family(m: &ModelSummary) -> &'static str {
    match m.family {
        qkswap_core::kernels::KernelFamily::Classical => "classical",
        qkswap_core::kernels::KernelFamily::Quantum => "quantum",
    }
}

fn csv(lines: impl IntoIterator<Item = String>, header: &str) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

pub fn table2(s: &RunSummary) -> String {
    let rows = s.models.iter().map(|m| {
        let a = &m.aggregate;
        let cells = [
            a.accuracy.mean,
            a.accuracy.std,
            a.precision.mean,
            a.precision.std,
            a.recall.mean,
            a.recall.std,
            a.f1.mean,
            a.f1.std,
            a.eer.mean,
            a.eer.std,
            a.pooled_eer,
            a.fpr.mean,
            a.fpr.std,
        ];
        let nums: Vec<String> = cells.iter().map(|&v| fmt_sig(v)).collect();
        format!("{},{},{},{}", s.dataset, m.name, family(m), nums.join(","))
    });
    csv(rows, TABLE2_HEADER)
}

pub fn table3(s: &RunSummary) -> String {
    let rows = s.diagnostics.iter().map(|d| {
        format!(
            "{},{},{},{},{}",
            s.dataset,
            d.model,
            fmt_sig(d.margin_mean),
            fmt_sig(d.separability),
            fmt_sig(d.security)
        )
    });
    csv(rows, TABLE3_HEADER)
}

pub fn table4(s: &RunSummary) -> String {
    let rows = s.comparisons.iter().map(|c| {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            s.dataset,
            c.model_a,
            c.model_b,
            fmt_sig(c.delta_eer),
            fmt_sig(c.delta_fpr),
            fmt_sig(c.t_statistic),
            fmt_sig(c.df),
            fmt_sig(c.p_value),
            fmt_sig(c.cohens_d),
            c.effect_label.as_str()
        )
    });
    csv(rows, TABLE4_HEADER)
}

#[derive(Clone, Copy, PartialEq)]
enum Best {
    Max,
    Min,
    None,
}

/// Indices of the rows holding the best finite value.
fn best_rows(values: &[f64], best: Best) -> Vec<bool> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let target = match best {
        Best::Max => finite.fold(f64::NEG_INFINITY, f64::max),
        Best::Min => finite.fold(f64::INFINITY, f64::min),
        Best::None => return vec![false; values.len()],
    };
    values.iter().map(|&v| v.is_finite() && v == target).collect()
}

struct Column {
    title: &'static str,
    cells: Vec<String>,
}

fn column(title: &'static str, values: &[f64], spread: Option<&[f64]>, best: Best) -> Column {
    let marks = best_rows(values, best);
    let cells = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = fmt_sig(v);
            if let Some(sd) = spread {
                c = format!("{c} ± {}", fmt_sig(sd[i]));
            }
            if marks[i] {
                c.push('*');
            }
            c
        })
        .collect();
    Column { title, cells }
}

fn text_table(title: &str, cols: &[Column]) -> String {
    let widths: Vec<usize> = cols
        .iter()
        .map(|c| c.cells.iter().map(|s| s.chars().count()).chain([c.title.len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = format!("{title}\n");
    out.push_str(&line(cols.iter().map(|c| c.title).collect()));
    out.push('\n');
    let rows = cols.first().map_or(0, |c| c.cells.len());
    for r in 0..rows {
        out.push_str(&line(cols.iter().map(|c| c.cells[r].as_str()).collect()));
        out.push('\n');
    }
    out
}

/// Human-readable tables; `*` marks the best value in each metric column.
pub fn tables_text(s: &RunSummary) -> String {
    let names: Vec<String> = s.models.iter().map(|m| m.name.clone()).collect();
    let fam: Vec<String> = s.models.iter().map(|m| family(m).to_string()).collect();
    let agg = |f: fn(&ModelSummary) -> (f64, f64)| -> (Vec<f64>, Vec<f64>) { s.models.iter().map(f).unzip() };
    let (acc, acc_sd) = agg(|m| (m.aggregate.accuracy.mean, m.aggregate.accuracy.std));
    let (prec, prec_sd) = agg(|m| (m.aggregate.precision.mean, m.aggregate.precision.std));
    let (rec, rec_sd) = agg(|m| (m.aggregate.recall.mean, m.aggregate.recall.std));
    let (f1, f1_sd) = agg(|m| (m.aggregate.f1.mean, m.aggregate.f1.std));
    let (eer, eer_sd) = agg(|m| (m.aggregate.eer.mean, m.aggregate.eer.std));
    let (fpr, fpr_sd) = agg(|m| (m.aggregate.fpr.mean, m.aggregate.fpr.std));
    let pooled: Vec<f64> = s.models.iter().map(|m| m.aggregate.pooled_eer).collect();

    let mut out = format!("dataset: {}\n\n", s.dataset);
    out.push_str(&text_table(
        "Detection metrics (mean ± std over folds)",
        &[
            Column { title: "model", cells: names },
            Column { title: "family", cells: fam },
            column("accuracy", &acc, Some(&acc_sd), Best::Max),
            column("precision", &prec, Some(&prec_sd), Best::Max),
            column("recall", &rec, Some(&rec_sd), Best::Max),
            column("f1", &f1, Some(&f1_sd), Best::Max),
            column("eer", &eer, Some(&eer_sd), Best::Min),
            column("eer_pooled", &pooled, None, Best::Min),
            column("fpr", &fpr, Some(&fpr_sd), Best::Min),
        ],
    ));

    let d = &s.diagnostics;
    let pick = |f: fn(&qkswap_core::evaluation::DiagnosticsRow) -> f64| -> Vec<f64> { d.iter().map(f).collect() };
    out.push('\n');
    out.push_str(&text_table(
        "Diagnostics (margin is kernel-specific; composite scores are unitless)",
        &[
            Column { title: "model", cells: d.iter().map(|r| r.model.clone()).collect() },
            column("margin", &pick(|r| r.margin_mean), None, Best::None),
            column("separability", &pick(|r| r.separability), None, Best::Max),
            column("security", &pick(|r| r.security), None, Best::Max),
            column(
                "robustness",
                &pick(|r| r.robustness),
                None,
                Best::None,
            ),
        ],
    ));

    let c = &s.comparisons;
    let pick = |f: fn(&qkswap_core::diagnostics::ComparisonReport) -> f64| -> Vec<f64> { c.iter().map(f).collect() };
    out.push('\n');
    out.push_str(&text_table(
        "Comparisons (a − b over per-fold EER; Welch t-test)",
        &[
            Column { title: "model_a", cells: c.iter().map(|r| r.model_a.clone()).collect() },
            Column { title: "model_b", cells: c.iter().map(|r| r.model_b.clone()).collect() },
            column("delta_eer", &pick(|r| r.delta_eer), None, Best::None),
            column("delta_fpr", &pick(|r| r.delta_fpr), None, Best::None),
            column("t", &pick(|r| r.t_statistic), None, Best::None),
            column("df", &pick(|r| r.df), None, Best::None),
            column("p", &pick(|r| r.p_value), None, Best::None),
            column("cohens_d", &pick(|r| r.cohens_d), None, Best::None),
            Column { title: "effect", cells: c.iter().map(|r| r.effect_label.as_str().to_string()).collect() },
        ],
    ));
    out
}

/// ROC (`threshold,fpr,tpr,fnr`) and DET (`threshold,fpr,fnr`) files for
/// every model and fold, rebuilt from the stored trial scores.
pub fn curves(s: &RunSummary) -> Result<Vec<Rendered>> {
    let mut out = Vec::new();
    for m in &s.models {
        for f in &m.folds {
            let scores: Vec<f64> = f.trials.iter().map(|t| t.score).collect();
            let labels: Vec<Label> = f.trials.iter().map(|t| t.label).collect();
            let roc = roc_curve(&scores, &labels)?;
            let roc_rows = roc.points.iter().map(|p| {
                format!("{},{},{},{}", fmt_sig(p.threshold), fmt_sig(p.fpr), fmt_sig(p.tpr), fmt_sig(p.fnr))
            });
            let det_rows = roc
                .points
                .iter()
                .map(|p| format!("{},{},{}", fmt_sig(p.threshold), fmt_sig(p.fpr), fmt_sig(p.fnr)));
            out.push((format!("roc_{}_{}.csv", m.name, f.fold), csv(roc_rows, "threshold,fpr,tpr,fnr")));
            out.push((format!("det_{}_{}.csv", m.name, f.fold), csv(det_rows, "threshold,fpr,fnr")));
        }
    }
    Ok(out)
}

/// Every derived file, sorted by name.
pub fn render(s: &RunSummary) -> Result<Vec<Rendered>> {
    let mut out = curves(s)?;
    out.push(("table2.csv".into(), table2(s)));
    out.push(("table3.csv".into(), table3(s)));
    out.push(("table4.csv".into(), table4(s)));
    out.push(("tables.txt".into(), tables_text(s)));
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_marks_ties_and_skips_non_finite() {
        assert_eq!(best_rows(&[0.1, 0.3, 0.3, f64::NAN], Best::Max), vec![false, true, true, false]);
        assert_eq!(best_rows(&[0.1, 0.3, f64::NEG_INFINITY], Best::Min), vec![true, false, false]);
        assert_eq!(best_rows(&[0.1], Best::None), vec![false]);
    }

    #[test]
    fn text_table_aligns_columns() {
        let t = text_table(
            "T",
            &[
                Column { title: "model", cells: vec!["a".into(), "long_name".into()] },
                column("eer", &[0.5, 0.25], None, Best::Min),
            ],
        );
        assert_eq!(t, "T\nmodel      eer\na          0.5\nlong_name  0.25*\n");
    }
}

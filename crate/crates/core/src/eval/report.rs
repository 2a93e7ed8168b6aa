//! Plain-text tables in the layout of a recognition-rate summary and a
//! class-discrimination (confusion) table.

use super::{ConfusionMatrix, EvaluationReport};

fn rate(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

/// One row per learner: cross-validation, learning-data and evaluation-data rates.
pub fn render_rate_table(reports: &[EvaluationReport]) -> String {
    let mut out = String::from("Recognition rate (%)\n");
    out.push_str(&format!("{:<8}{:>14}{:>14}{:>14}\n", "", "Cross valid.", "Learn. data", "Eval. data"));
    for r in reports {
        out.push_str(&format!(
            "{:<8}{:>14}{:>14}{:>14}\n",
            r.learner,
            rate(r.recognition_rate_cv),
            rate(r.recognition_rate_train),
            rate(r.recognition_rate_eval)
        ));
    }
    out
}

/// Rows are true classes, columns predicted classes.
pub fn render_confusion(title: &str, cm: &ConfusionMatrix) -> String {
    let mut out = format!("{title}\n{:<14}", "true \\ pred");
    for c in &cm.classes {
        out.push_str(&format!("{:>14}", c.as_str()));
    }
    out.push('\n');
    for (class, row) in cm.classes.iter().zip(&cm.counts) {
        out.push_str(&format!("{:<14}", class.as_str()));
        for v in row {
            out.push_str(&format!("{v:>14}"));
        }
        out.push('\n');
    }
    out
}

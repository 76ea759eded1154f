use gdl_reward::metrics::{MeanStderr, Summary};
use gdl_reward::EvalReport;

fn cell(v: &MeanStderr<f64>, digits: usize) -> String {
    format!("{:.*} ± {:.*}", digits, v.mean, digits, v.stderr)
}

fn row(name: &str, s: &Summary<f64>) -> String {
    format!(
        "{:<20} {:>5} {:>15} {:>15} {:>15} {:>15}\n",
        name,
        s.instances,
        cell(&s.compilability, 1),
        cell(&s.functionality, 1),
        cell(&s.rouge_l, 1),
        cell(&s.ncd, 3),
    )
}

/// Compilability, functionality, ROUGE-L and NCD per category, overall last.
pub fn render(report: &EvalReport) -> String {
    let mut out = format!(
        "{:<20} {:>5} {:>15} {:>15} {:>15} {:>15}\n",
        "category", "n", "Compilability", "Functionality", "ROUGE-L", "NCD"
    );
    for (name, s) in &report.categories {
        out += &row(name, s);
    }
    out += &row("overall", &report.overall);
    out += &format!("seed groups: {}\n", report.overall.seed_groups);
    out
}

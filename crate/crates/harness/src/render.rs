//! Plain-text rendering of evaluation reports, grouped the way the attack
//! matrix is read: the zero-modality baseline first, then single-modality
//! rows, then multi-modality rows, one column per (fusion, classifier).

use crate::matrix::EvalReport;

pub fn render_matrix(report: &EvalReport) -> String {
    let mut columns: Vec<(String, String)> = Vec::new();
    for row in &report.rows {
        let key = (row.fusion.clone(), row.classifier.clone());
        if !columns.contains(&key) {
            columns.push(key);
        }
    }
    let mut attacks: Vec<(String, usize)> = Vec::new();
    for row in &report.rows {
        if !attacks.iter().any(|(a, _)| *a == row.attack) {
            attacks.push((row.attack.clone(), row.manipulated_count));
        }
    }

    let system = report
        .rows
        .first()
        .map(|r| r.system.clone())
        .unwrap_or_default();
    let col_width = 26usize;
    let mut out = format!("attack matrix — system: {system} (seed {})\n", report.seed);
    out.push_str(&format!("{:<16}", "attack"));
    for (fusion, classifier) in &columns {
        out.push_str(&format!("{:<col_width$}", format!("{fusion}/{classifier}")));
    }
    out.push('\n');
    out.push_str(&"-".repeat(16 + col_width * columns.len()));
    out.push('\n');

    let group_of = |manipulated: usize| match manipulated {
        0 => 0,
        1 => 1,
        _ => 2,
    };
    let group_names = ["zero-modality", "single-modality", "multi-modality"];
    let mut current_group = usize::MAX;
    for (attack, manipulated) in &attacks {
        let group = group_of(*manipulated);
        if group != current_group {
            current_group = group;
            out.push_str(&format!("[{}]\n", group_names[group]));
        }
        out.push_str(&format!("{attack:<16}"));
        for (fusion, classifier) in &columns {
            let cell = report
                .find(fusion, classifier, attack)
                .map(|r| {
                    let fpr = r
                        .metrics
                        .fpr
                        .map(|v| format!("FPR {:5.1}%", 100.0 * v))
                        .unwrap_or_else(|| "FPR   n/a".into());
                    let fnr = r
                        .metrics
                        .fnr
                        .map(|v| format!("FNR {:4.1}%", 100.0 * v))
                        .unwrap_or_else(|| "FNR  n/a".into());
                    match r.metrics.f1 {
                        Some(f1) if *manipulated == 0 => {
                            format!("{fpr} {fnr} F1 {f1:.3}")
                        }
                        _ => format!("{fpr} {fnr}"),
                    }
                })
                .unwrap_or_default();
            out.push_str(&format!("{cell:<col_width$}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ReportRow;
    use copresence::learn::Metrics;

    #[test]
    fn renders_grouped_rows() {
        let report = EvalReport {
            rows: vec![
                ReportRow {
                    system: "audio-radio".into(),
                    fusion: "features".into(),
                    classifier: "tree".into(),
                    attack: "none".into(),
                    manipulated_count: 0,
                    metrics: Metrics::from_counts(90, 2, 98, 10),
                },
                ReportRow {
                    system: "audio-radio".into(),
                    fusion: "features".into(),
                    classifier: "tree".into(),
                    attack: "{W}".into(),
                    manipulated_count: 1,
                    metrics: Metrics::from_counts(90, 80, 20, 10),
                },
                ReportRow {
                    system: "audio-radio".into(),
                    fusion: "features".into(),
                    classifier: "tree".into(),
                    attack: "{Au+B+W}".into(),
                    manipulated_count: 3,
                    metrics: Metrics::from_counts(90, 99, 1, 10),
                },
            ],
            seed: 42,
            tool: "test".into(),
        };
        let text = render_matrix(&report);
        assert!(text.contains("[zero-modality]"));
        assert!(text.contains("[single-modality]"));
        assert!(text.contains("[multi-modality]"));
        assert!(text.contains("{Au+B+W}"));
        assert!(text.contains("F1 0.938"));
    }
}

use std::fmt::Write;
use std::str::FromStr;

use super::MatchStats;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn rows(s: &MatchStats) -> [(&'static str, String); 10] {
    [
        ("Kicks to goal", s.kicks.to_string()),
        ("Kicks (average per game)", format!("{:.2}", s.kicks_mean_per_game)),
        ("Kicks (standard deviation)", format!("{:.3}", s.kicks_std)),
        ("Goals Scored", s.goals.to_string()),
        ("Goals Scored (average per game)", format!("{:.2}", s.goals_mean_per_game)),
        ("Goals Scored (standard deviation)", format!("{:.3}", s.goals_std)),
        ("Effectiveness", s.effectiveness.map_or_else(|| "n/a".to_string(), |e| format!("{e:.3}"))),
        ("Wins", s.wins.to_string()),
        ("Losses", s.losses.to_string()),
        ("Draws", s.draws.to_string()),
    ]
}

/// Render two policies' stats side by side.
///
/// JSON carries the full-precision values; text and CSV round for display.
pub fn render_report(a: &MatchStats, b: &MatchStats, format: ReportFormat) -> Result<String> {
    let (ra, rb) = (rows(a), rows(b));
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(&[a, b])?;
            out.push('\n');
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["metric", a.policy.as_str(), b.policy.as_str()])?;
            for ((name, va), (_, vb)) in ra.iter().zip(&rb) {
                w.write_record([*name, va.as_str(), vb.as_str()])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::data(e.to_string()))?;
            out = String::from_utf8(bytes).expect("csv output is utf-8");
        }
        ReportFormat::Text => {
            let width = ra.iter().map(|r| r.0.len()).max().unwrap_or(0);
            let ca = ra.iter().map(|r| r.1.len()).chain([a.policy.len()]).max().unwrap_or(0);
            let cb = rb.iter().map(|r| r.1.len()).chain([b.policy.len()]).max().unwrap_or(0);
            let _ = writeln!(out, "{:<width$}  {:>ca$}  {:>cb$}", "Metric", a.policy, b.policy);
            let _ = writeln!(out, "{}", "-".repeat(width + ca + cb + 4));
            for ((name, va), (_, vb)) in ra.iter().zip(&rb) {
                let _ = writeln!(out, "{name:<width$}  {va:>ca$}  {vb:>cb$}");
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> (MatchStats, MatchStats) {
        (
            MatchStats::from_games("mlp", &[(3, 2, 1), (2, 1, 1), (4, 0, 2)]),
            MatchStats::from_games("lda", &[(3, 1, 2), (2, 1, 1), (0, 2, 0)]),
        )
    }

    #[test]
    fn zero_kicks_render_na() {
        let empty = MatchStats::from_games("idle", &[(0, 0, 0)]);
        let text = render_report(&empty, &empty, ReportFormat::Text).unwrap();
        assert!(text.lines().any(|l| l.starts_with("Effectiveness") && l.contains("n/a")));
    }

    #[test]
    fn json_round_trip() {
        let (a, b) = stats();
        let json = render_report(&a, &b, ReportFormat::Json).unwrap();
        let back: Vec<MatchStats> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn formats_agree() {
        let (a, b) = stats();
        let csv_text = render_report(&a, &b, ReportFormat::Csv).unwrap();
        let text = render_report(&a, &b, ReportFormat::Text).unwrap();
        assert_eq!(csv_text.lines().count(), 11);
        assert_eq!(text.lines().count(), 12);
        assert!(csv_text.contains("Goals Scored,3,4"));
        assert!(text.lines().any(|l| l.starts_with("Wins") && l.trim_end().ends_with('1')));
        assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::UnknownFormat(_))));
    }
}

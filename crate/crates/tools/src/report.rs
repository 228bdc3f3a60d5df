//! Plain-text rendering of summaries and reports.

use std::fmt::Write;

use gesturelog_core::annotation::Summary;
use gesturelog_core::latency::LatencyStats;
use gesturelog_core::metrics::EvaluationReport;

use crate::replay::ReplayReport;

fn ms(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

pub fn render_summary(s: &Summary) -> String {
    let mut out = String::new();
    if s.labels.is_empty() {
        out.push_str("no annotations\n");
        return out;
    }
    let w = s.labels.iter().map(|l| l.label.chars().count()).max().unwrap_or(0).max(5);
    writeln!(out, "{:<w$}  {:<8}  {:>5}  {:>10}  {:>6}", "label", "gesture", "count", "total_ms", "share").unwrap();
    for l in &s.labels {
        let share = l.share.map_or_else(|| "-".to_string(), |x| format!("{:.1}%", x * 100.0));
        writeln!(
            out,
            "{:<w$}  {:<8}  {:>5}  {:>10}  {:>6}",
            l.label,
            l.gesture.as_str(),
            l.count,
            l.total_duration_ms,
            share
        )
        .unwrap();
    }
    writeln!(out, "total annotated: {} ms", s.total_annotated_ms).unwrap();
    writeln!(out, "\ntimeline").unwrap();
    for iv in &s.timeline {
        writeln!(out, "  {:>9} - {:>9} ms  {} ({} frames, conf {:.4})", iv.start_ms, iv.end_ms, iv.label, iv.frame_count, iv.mean_confidence)
            .unwrap();
    }
    out
}

pub fn render_latency(name: &str, l: &LatencyStats) -> String {
    format!(
        "{name}: n={} mean={} p50={} p95={} max={} ms\n",
        l.count,
        ms(l.mean),
        ms(l.p50),
        ms(l.p95),
        ms(l.max)
    )
}

pub fn render_replay(r: &ReplayReport) -> String {
    let mut out = String::new();
    writeln!(out, "session {} (speed {}x)", r.session_id, r.speed).unwrap();
    writeln!(out, "frames sent {}, recognitions {}, intervals {}", r.frames_sent, r.recognitions_received, r.intervals.len()).unwrap();
    out.push_str(&render_latency("end-to-end", &r.end_to_end_latency));
    out.push_str(&render_latency("server", &r.server_latency));
    out
}

pub fn render_evaluation(r: &EvaluationReport) -> String {
    let mut out = String::new();
    writeln!(out, "{:<8}  {:>9}  {:>6}  {:>6}", "class", "precision", "recall", "f1").unwrap();
    for (i, g) in r.class_order.iter().enumerate() {
        writeln!(
            out,
            "{:<8}  {:>9.4}  {:>6.4}  {:>6.4}",
            g.as_str(),
            r.per_class_precision[i],
            r.per_class_recall[i],
            r.per_class_f1[i]
        )
        .unwrap();
    }
    writeln!(out, "macro f1 {:.4}, accuracy {:.4}, n={}", r.macro_f1, r.accuracy(), r.n_samples).unwrap();
    out
}

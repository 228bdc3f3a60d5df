use std::collections::BTreeMap;

use chrono::{DateTime, Duration, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{AnnotationInterval, SessionLog, SessionState};
use crate::gesture::GestureClass;

pub const CSV_HEADER: &str = "session_id,label,gesture,start_iso8601,start_ms,end_ms,duration_ms,mean_confidence,frame_count";
const ISO_MS: &str = "%Y-%m-%dT%H:%M:%S%.3fZ";

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("session must be stopped before export")]
    SessionNotStopped,
    #[error("csv header mismatch: expected {CSV_HEADER:?}")]
    Header,
    #[error("csv row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One exported row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub session_id: String,
    pub label: String,
    pub gesture: GestureClass,
    pub start: DateTime<Utc>,
    pub start_ms: u64,
    pub end_ms: u64,
    pub duration_ms: u64,
    pub mean_confidence: f64,
    pub frame_count: u64,
}

impl CsvRecord {
    pub fn from_interval(session_id: &str, started_at: DateTime<Utc>, iv: &AnnotationInterval) -> Self {
        CsvRecord {
            session_id: session_id.to_string(),
            label: iv.label.clone(),
            gesture: iv.gesture,
            start: started_at + Duration::milliseconds(iv.start_ms as i64),
            start_ms: iv.start_ms,
            end_ms: iv.end_ms,
            duration_ms: iv.duration_ms,
            mean_confidence: iv.mean_confidence,
            frame_count: iv.frame_count,
        }
    }

    pub fn interval(&self) -> AnnotationInterval {
        AnnotationInterval {
            label: self.label.clone(),
            gesture: self.gesture,
            start_ms: self.start_ms,
            end_ms: self.end_ms,
            duration_ms: self.duration_ms,
            mean_confidence: self.mean_confidence,
            frame_count: self.frame_count,
        }
    }

    fn fields(&self) -> [String; 9] {
        [
            self.session_id.clone(),
            self.label.clone(),
            self.gesture.as_str().to_string(),
            self.start.format(ISO_MS).to_string(),
            self.start_ms.to_string(),
            self.end_ms.to_string(),
            self.duration_ms.to_string(),
            format!("{:.4}", self.mean_confidence),
            self.frame_count.to_string(),
        ]
    }
}

/// RFC 4180 with LF line endings. Fields are quoted only when needed.
pub fn write_csv(records: &[CsvRecord]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("write to Vec");
    for r in records {
        w.write_record(r.fields()).expect("write to Vec");
    }
    w.into_inner().expect("flush to Vec")
}

/// Bit-exact CSV for a stopped session, one row per interval in start order.
pub fn export_csv(log: &SessionLog) -> Result<Vec<u8>, CsvError> {
    if log.state != SessionState::Stopped {
        return Err(CsvError::SessionNotStopped);
    }
    let mut intervals: Vec<&AnnotationInterval> = log.intervals.iter().collect();
    intervals.sort_by_key(|iv| (iv.start_ms, iv.end_ms));
    let records: Vec<CsvRecord> = intervals
        .into_iter()
        .map(|iv| CsvRecord::from_interval(&log.session_id, log.started_at, iv))
        .collect();
    Ok(write_csv(&records))
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<CsvRecord>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut rows = rdr.records();
    match rows.next() {
        Some(Ok(h)) if h.iter().eq(CSV_HEADER.split(',')) => {}
        Some(Err(e)) => return Err(e.into()),
        _ => return Err(CsvError::Header),
    }
    let mut out = Vec::new();
    for (i, rec) in rows.enumerate() {
        let row = i + 1;
        let rec = rec?;
        let bad = |reason: String| CsvError::Row { row, reason };
        if rec.len() != 9 {
            return Err(bad(format!("expected 9 fields, got {}", rec.len())));
        }
        let int = |k: usize| rec[k].parse::<u64>().map_err(|e| bad(format!("field {k}: {e}")));
        let start = NaiveDateTime::parse_from_str(&rec[3], ISO_MS)
            .map_err(|e| bad(format!("start_iso8601: {e}")))?
            .and_utc();
        let mean_confidence: f64 = rec[7].parse().map_err(|e| bad(format!("mean_confidence: {e}")))?;
        if !(0.0..=1.0).contains(&mean_confidence) {
            return Err(bad("mean_confidence outside [0, 1]".into()));
        }
        let gesture: GestureClass = rec[2].parse().map_err(|e| bad(format!("{e}")))?;
        let (start_ms, end_ms, duration_ms) = (int(4)?, int(5)?, int(6)?);
        if end_ms < start_ms || duration_ms != end_ms - start_ms {
            return Err(bad("duration_ms must equal end_ms - start_ms".into()));
        }
        out.push(CsvRecord {
            session_id: rec[0].to_string(),
            label: rec[1].to_string(),
            gesture,
            start,
            start_ms,
            end_ms,
            duration_ms,
            mean_confidence,
            frame_count: int(8)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub label: String,
    pub gesture: GestureClass,
    pub total_duration_ms: u64,
    pub count: u64,
    /// Fraction of all annotated time; `None` when nothing was annotated for any time.
    pub share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total_annotated_ms: u64,
    /// Sorted by label.
    pub labels: Vec<LabelSummary>,
    /// Intervals sorted by start time.
    pub timeline: Vec<AnnotationInterval>,
}

/// Per-label totals, counts and time shares. Independent of interval order.
pub fn summarize(log: &SessionLog) -> Summary {
    let mut by_label: BTreeMap<&str, (GestureClass, u64, u64)> = BTreeMap::new();
    let mut total = 0u64;
    for iv in &log.intervals {
        let e = by_label.entry(iv.label.as_str()).or_insert((iv.gesture, 0, 0));
        e.1 += iv.duration_ms;
        e.2 += 1;
        total += iv.duration_ms;
    }
    let labels = by_label
        .into_iter()
        .map(|(label, (gesture, dur, count))| LabelSummary {
            label: label.to_string(),
            gesture,
            total_duration_ms: dur,
            count,
            share: (total > 0).then(|| dur as f64 / total as f64),
        })
        .collect();
    let mut timeline = log.intervals.clone();
    timeline.sort_by(|a, b| {
        (a.start_ms, a.end_ms, &a.label)
            .cmp(&(b.start_ms, b.end_ms, &b.label))
            .then(a.mean_confidence.total_cmp(&b.mean_confidence))
            .then(a.frame_count.cmp(&b.frame_count))
    });
    Summary { total_annotated_ms: total, labels, timeline }
}

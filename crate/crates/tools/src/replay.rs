//! Streams a trace to a live server and checks what comes back.
//!
//! One sender and one receiver share the socket. The sender paces frames by
//! capture time divided by `speed` and never has more than `window`
//! unanswered frames in flight.

use std::sync::Arc;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{mpsc, Semaphore};
use tokio_tungstenite::tungstenite::Message;

use gesturelog_core::annotation::{parse_csv, CsvRecord};
use gesturelog_core::latency::LatencyStats;
use gesturelog_core::protocol::{parse_server_message, RecognitionMessage, ServerMessage};
use gesturelog_core::{AnnotationInterval, LabelMapping, SegmenterConfig, SessionLog};

use crate::trace::ReplayTrace;
use crate::ToolError;

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    pub mapping: LabelMapping,
    /// Server defaults apply when `None`.
    pub segmenter: Option<SegmenterConfig>,
    pub speed: f64,
    pub window: usize,
    /// Upper bound on waiting for any single reply.
    pub reply_timeout: Duration,
}

impl ReplayOptions {
    pub fn new(mapping: LabelMapping) -> Self {
        ReplayOptions { mapping, segmenter: None, speed: 1.0, window: 32, reply_timeout: Duration::from_secs(10) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub session_id: String,
    pub speed: f64,
    pub frames_sent: u64,
    pub recognitions_received: u64,
    /// Intervals pushed over the socket while recording.
    pub streamed_intervals: u64,
    /// Final interval list, identical to the exported CSV rows.
    pub intervals: Vec<AnnotationInterval>,
    /// Send to recognition receipt, ms.
    pub end_to_end_latency: LatencyStats,
    /// As reported by the server.
    pub server_latency: LatencyStats,
    #[serde(skip)]
    pub recognitions: Vec<RecognitionMessage>,
    #[serde(skip)]
    pub csv: Vec<u8>,
}

#[derive(Deserialize)]
struct Created {
    session_id: String,
}

fn ws_url(base: &str) -> String {
    if let Some(rest) = base.strip_prefix("https://") {
        format!("wss://{rest}")
    } else if let Some(rest) = base.strip_prefix("http://") {
        format!("ws://{rest}")
    } else {
        format!("ws://{base}")
    }
}

async fn checked(resp: reqwest::Response, what: &str) -> Result<reqwest::Response, ToolError> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let body = resp.text().await.unwrap_or_default();
    let msg = format!("{what}: HTTP {status}: {body}");
    Err(if status.is_client_error() { ToolError::invalid(msg) } else { ToolError::Network(msg) })
}

fn same_interval(csv: &CsvRecord, iv: &AnnotationInterval) -> bool {
    let c = csv.interval();
    (c.label.as_str(), c.gesture, c.start_ms, c.end_ms, c.duration_ms, c.frame_count)
        == (iv.label.as_str(), iv.gesture, iv.start_ms, iv.end_ms, iv.duration_ms, iv.frame_count)
        && format!("{:.4}", c.mean_confidence) == format!("{:.4}", iv.mean_confidence)
}

/// Creates and starts a session, streams `trace`, stops the session and
/// verifies that the exported CSV agrees with every interval seen.
pub async fn replay(trace: &ReplayTrace, server: &str, opts: &ReplayOptions) -> Result<ReplayReport, ToolError> {
    trace.validate()?;
    if !(opts.speed > 0.0 && opts.speed.is_finite()) {
        return Err(ToolError::invalid(format!("speed must be positive, got {}", opts.speed)));
    }
    if opts.window == 0 {
        return Err(ToolError::invalid("window must be at least 1"));
    }
    let base = server.trim_end_matches('/');
    let http = reqwest::Client::new();

    let mut body = json!({ "mapping": opts.mapping });
    if let Some(cfg) = opts.segmenter {
        body["config"] = serde_json::to_value(cfg).expect("config serializes");
    }
    let created: Created = checked(http.post(format!("{base}/sessions")).json(&body).send().await?, "create session")
        .await?
        .json()
        .await?;
    let id = created.session_id;
    checked(http.post(format!("{base}/sessions/{id}/start")).send().await?, "start session").await?;

    let (socket, _) = tokio_tungstenite::connect_async(format!("{}/ws/sessions/{id}", ws_url(base))).await?;
    let (mut sink, mut stream) = socket.split();

    let n = trace.frames.len();
    let window = Arc::new(Semaphore::new(opts.window));
    let (sent_tx, mut sent_rx) = mpsc::unbounded_channel::<(u64, Instant)>();

    let sender = {
        let window = window.clone();
        let trace = trace.clone();
        let id = id.clone();
        let speed = opts.speed;
        tokio::spawn(async move {
            let t0 = trace.frames.first().map_or(0, |f| f.t_capture_ms);
            let start = tokio::time::Instant::now();
            for i in 0..n {
                let offset = (trace.frames[i].t_capture_ms - t0) as f64 / speed;
                tokio::time::sleep_until(start + Duration::from_secs_f64(offset / 1000.0)).await;
                let permit = window.acquire().await.expect("window semaphore is never closed");
                permit.forget();
                let text = serde_json::to_string(&gesturelog_core::protocol::ClientMessage::Frame(trace.message(&id, i)))
                    .expect("frame serializes");
                if sent_tx.send((i as u64, Instant::now())).is_err() {
                    break;
                }
                sink.send(Message::text(text)).await?;
            }
            Ok::<_, tokio_tungstenite::tungstenite::Error>(sink)
        })
    };

    let mut recognitions = Vec::with_capacity(n);
    let mut latencies = Vec::with_capacity(n);
    let mut streamed = Vec::new();
    while recognitions.len() < n {
        let msg = match tokio::time::timeout(opts.reply_timeout, stream.next()).await {
            Err(_) => return Err(ToolError::Network(format!("no reply within {:?}", opts.reply_timeout))),
            Ok(None) => return Err(ToolError::Network("socket closed before all replies arrived".into())),
            Ok(Some(m)) => m?,
        };
        let text = match msg {
            Message::Text(t) => t,
            Message::Ping(_) | Message::Pong(_) => continue,
            other => return Err(ToolError::ProtocolViolation(format!("unexpected socket message {other:?}"))),
        };
        match parse_server_message(text.as_str()).map_err(|e| ToolError::ProtocolViolation(e.to_string()))? {
            ServerMessage::Recognition(r) => {
                let expected = recognitions.len() as u64;
                let (seq, sent_at) = sent_rx
                    .recv()
                    .await
                    .ok_or_else(|| ToolError::ProtocolViolation(format!("recognition for unsent seq {}", r.seq)))?;
                if r.seq != expected || seq != expected {
                    return Err(ToolError::ProtocolViolation(format!("expected seq {expected}, got {}", r.seq)));
                }
                latencies.push(sent_at.elapsed().as_secs_f64() * 1000.0);
                recognitions.push(r);
                window.add_permits(1);
            }
            ServerMessage::Interval(iv) => streamed.push(iv),
            ServerMessage::Error(e) => {
                return Err(ToolError::ProtocolViolation(format!("server error {:?}: {}", e.code, e.message)))
            }
        }
    }
    let mut sink = sender.await.map_err(|e| ToolError::Network(e.to_string()))??;

    let log: SessionLog = checked(http.post(format!("{base}/sessions/{id}/stop")).send().await?, "stop session")
        .await?
        .json()
        .await?;
    let _ = sink.send(Message::Close(None)).await;

    let csv = checked(http.get(format!("{base}/sessions/{id}/export.csv")).send().await?, "export csv")
        .await?
        .bytes()
        .await?
        .to_vec();
    let rows = parse_csv(&csv)?;
    let server_latency: LatencyStats = checked(http.get(format!("{base}/sessions/{id}/latency")).send().await?, "latency")
        .await?
        .json()
        .await?;

    if log.intervals.len() < streamed.len() || log.intervals[..streamed.len()] != streamed[..] {
        return Err(ToolError::ProtocolViolation("final log does not start with the streamed intervals".into()));
    }
    if rows.len() != log.intervals.len() || !rows.iter().zip(&log.intervals).all(|(r, iv)| same_interval(r, iv)) {
        return Err(ToolError::ProtocolViolation("exported CSV disagrees with the session intervals".into()));
    }
    if let Some(r) = rows.iter().find(|r| r.session_id != id) {
        return Err(ToolError::ProtocolViolation(format!("CSV row belongs to session {}", r.session_id)));
    }

    Ok(ReplayReport {
        session_id: id,
        speed: opts.speed,
        frames_sent: n as u64,
        recognitions_received: recognitions.len() as u64,
        streamed_intervals: streamed.len() as u64,
        intervals: log.intervals,
        end_to_end_latency: LatencyStats::from_samples(&latencies),
        server_latency,
        recognitions,
        csv,
    })
}

use serde::{Deserialize, Serialize};

/// Order statistics over latency samples in milliseconds. All fields are
/// `None` when there are no samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub count: u64,
    pub mean: Option<f64>,
    pub p50: Option<f64>,
    pub p95: Option<f64>,
    pub max: Option<f64>,
}

/// Value at rank `ceil(pct / 100 * n)` of the sorted samples.
pub fn nearest_rank(sorted: &[f64], pct: u32) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len() as u64;
    let rank = (u64::from(pct) * n).div_ceil(100).max(1);
    Some(sorted[(rank - 1) as usize])
}

impl LatencyStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut sorted: Vec<f64> = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len() as u64;
        LatencyStats {
            count,
            mean: (count > 0).then(|| sorted.iter().sum::<f64>() / count as f64),
            p50: nearest_rank(&sorted, 50),
            p95: nearest_rank(&sorted, 95),
            max: sorted.last().copied(),
        }
    }
}

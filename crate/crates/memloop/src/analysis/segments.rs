//! 4-segment decomposition of a bipolar cycle:
//! 1: 0 -> +max, 2: +max -> 0, 3: 0 -> -max, 4: -max -> 0.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::simulator::IVTrace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSpan {
    /// Segment id 1..=4 by position in the cycle, not by time order.
    pub id: u8,
    pub range: Range<usize>,
}

/// The four segments in chronological order. A trace that starts at a
/// zero crossing reports ids 1,2,3,4; one that starts at the +peak
/// reports 2,3,4,1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleSegments {
    spans: Vec<SegmentSpan>,
}

impl CycleSegments {
    pub fn spans(&self) -> &[SegmentSpan] {
        &self.spans
    }

    pub fn by_id(&self, id: u8) -> Option<&SegmentSpan> {
        self.spans.iter().find(|s| s.id == id)
    }

    pub fn ids(&self) -> Vec<u8> {
        self.spans.iter().map(|s| s.id).collect()
    }
}

/// Split one full bipolar cycle at the voltage extrema and zero crossings.
///
/// The cycle must start on a segment boundary (a zero crossing or an
/// extremum), which holds for the measurement protocol and for generated
/// waveforms with quarter-period phase offsets.
pub fn segment_trace(trace: &IVTrace) -> Result<CycleSegments> {
    let v: Vec<f64> = trace.voltages().collect();
    let n = v.len();
    if n < 4 {
        return Err(Error::NotSegmentable(format!(
            "need at least 4 samples, got {n}"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotSegmentable("non-finite voltage sample".into()));
    }
    let vmax = v.iter().cloned().fold(f64::MIN, f64::max);
    let vmin = v.iter().cloned().fold(f64::MAX, f64::min);
    if !(vmax > 0.0 && vmin < 0.0) {
        return Err(Error::NotSegmentable(
            "trace is not a full bipolar cycle (needs one + peak and one - peak)".into(),
        ));
    }

    // Boundaries at zero crossings...
    let mut bounds = vec![0];
    for k in 1..n {
        if v[k - 1] * v[k] < 0.0 || (v[k] == 0.0 && v[k - 1] != 0.0) {
            bounds.push(k);
        }
    }
    bounds.push(n);
    bounds.dedup();

    // ...plus the extremum interior to each same-sign run.
    let mut cuts = Vec::new();
    for w in bounds.windows(2) {
        let (s, e) = (w[0], w[1]);
        let peak = (s..e)
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
            .unwrap();
        if peak > s && peak < e - 1 {
            cuts.push(peak);
        }
    }
    bounds.extend(cuts);
    bounds.sort_unstable();
    bounds.dedup();

    let mut spans: Vec<Range<usize>> = bounds
        .windows(2)
        .map(|w| w[0]..w[1])
        .filter(|r| !r.is_empty())
        .collect();
    // A closed cycle that ends exactly on the return crossing leaves a
    // one-sample tail; fold it into the last segment.
    if spans.len() == 5 && spans[4].len() == 1 {
        let tail = spans.pop().unwrap();
        spans[3].end = tail.end;
    }
    if spans.len() != 4 {
        return Err(Error::NotSegmentable(format!(
            "expected 4 segments, found {} (is the trace exactly one cycle \
             starting on a segment boundary?)",
            spans.len()
        )));
    }

    let mut out = Vec::with_capacity(4);
    for range in spans {
        let peak = range
            .clone()
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
            .unwrap();
        let positive = v[peak] > 0.0;
        let toward_peak = v[range.end - 1].abs() >= v[range.start].abs();
        let id = match (positive, toward_peak) {
            (true, true) => 1,
            (true, false) => 2,
            (false, true) => 3,
            (false, false) => 4,
        };
        out.push(SegmentSpan { id, range });
    }

    let mut ids = out.iter().map(|s| s.id).collect::<Vec<_>>();
    ids.sort_unstable();
    if ids != [1, 2, 3, 4] {
        return Err(Error::NotSegmentable(
            "segments do not form one bipolar cycle".into(),
        ));
    }
    Ok(CycleSegments { spans: out })
}

// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Seeded Poisson spike trains.
//!
//! Constant profiles draw exponential inter-arrival times directly.
//! Piecewise-constant profiles are generated by thinning a homogeneous process
//! at the profile's peak rate. Each train owns the substream
//! `(seed, link_id)` so trains are independent and replayable.

use std::io::{Read, Write};

use thiserror::Error;

use crate::rng::{self, Seed};

#[derive(Debug, Error)]
pub enum SpikeError {
    #[error("invalid rate profile: {0}")]
    Profile(String),
    #[error("horizon must be > 0, got {0}")]
    Horizon(f64),
    #[error("trains disagree on horizon: link {link} has {found}, expected {expected}")]
    HorizonMismatch { link: u64, expected: f64, found: f64 },
    #[error("invalid spike train for link {link}: {reason}")]
    Train { link: u64, reason: String },
    #[error("spike CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Rate segment `[start, end)` in ms with a rate in spikes/ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSegment {
    pub start: f64,
    pub end: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateProfile {
    Constant(f64),
    /// `base_rate` applies outside every segment.
    Piecewise {
        base_rate: f64,
        segments: Vec<RateSegment>,
    },
}

impl RateProfile {
    pub fn validate(&self) -> Result<(), SpikeError> {
        let ok_rate = |r: f64| r.is_finite() && r >= 0.0;
        match self {
            RateProfile::Constant(r) if !ok_rate(*r) => {
                Err(SpikeError::Profile(format!("rate must be finite and ≥ 0, got {r}")))
            }
            RateProfile::Constant(_) => Ok(()),
            RateProfile::Piecewise { base_rate, segments } => {
                if !ok_rate(*base_rate) {
                    return Err(SpikeError::Profile(format!("base rate {base_rate} invalid")));
                }
                let mut prev_end = f64::NEG_INFINITY;
                for s in segments {
                    if !ok_rate(s.rate) {
                        return Err(SpikeError::Profile(format!("segment rate {} invalid", s.rate)));
                    }
                    if !(s.start.is_finite() && s.end.is_finite() && s.start < s.end) {
                        return Err(SpikeError::Profile(format!(
                            "segment [{}, {}) is empty or not finite",
                            s.start, s.end
                        )));
                    }
                    if s.start < prev_end {
                        return Err(SpikeError::Profile(format!(
                            "segment starting at {} overlaps or is out of order",
                            s.start
                        )));
                    }
                    prev_end = s.end;
                }
                Ok(())
            }
        }
    }

    /// Rate active at time `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        match self {
            RateProfile::Constant(r) => *r,
            RateProfile::Piecewise { base_rate, segments } => {
                let i = segments.partition_point(|s| s.end <= t);
                match segments.get(i) {
                    Some(s) if s.start <= t => s.rate,
                    _ => *base_rate,
                }
            }
        }
    }

    pub fn peak_rate(&self) -> f64 {
        match self {
            RateProfile::Constant(r) => *r,
            RateProfile::Piecewise { base_rate, segments } => {
                segments.iter().map(|s| s.rate).fold(*base_rate, f64::max)
            }
        }
    }
}

/// Spike times for one link, strictly increasing inside `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    pub link_id: u64,
    pub times: Vec<f64>,
    pub horizon: f64,
}

impl SpikeTrain {
    pub fn new(link_id: u64, times: Vec<f64>, horizon: f64) -> Result<Self, SpikeError> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(SpikeError::Horizon(horizon));
        }
        if let Some(&t) = times.iter().find(|&&t| !(0.0..horizon).contains(&t)) {
            return Err(SpikeError::Train { link: link_id, reason: format!("time {t} outside [0, {horizon})") });
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpikeError::Train { link: link_id, reason: "times not strictly increasing".into() });
        }
        Ok(Self { link_id, times, horizon })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Generate a Poisson train on `[0, horizon)` for `link_id`.
pub fn generate_poisson(
    profile: &RateProfile,
    horizon: f64,
    seed: Seed,
    link_id: u64,
) -> Result<SpikeTrain, SpikeError> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(SpikeError::Horizon(horizon));
    }
    profile.validate()?;
    let peak = profile.peak_rate();
    let mut times = Vec::new();
    if peak > 0.0 {
        let mut rng = rng::stream_rng(seed, link_id);
        let thinning = matches!(profile, RateProfile::Piecewise { .. });
        let mut t = 0.0;
        loop {
            t += rng::exponential(&mut rng, peak);
            if t >= horizon {
                break;
            }
            if thinning {
                let u = rng::open_unit(&mut rng);
                if u * peak >= profile.rate_at(t) {
                    continue;
                }
            }
            // Sub-ulp gaps would break strict ordering.
            if times.last().is_some_and(|&last| t <= last) {
                continue;
            }
            times.push(t);
        }
    }
    Ok(SpikeTrain { link_id, times, horizon })
}

/// One spike in a merged stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeEvent {
    pub time: f64,
    pub link_id: u64,
}

/// Merge trains into one stream ordered by time, ties by ascending link id.
pub fn merge_trains(trains: &[SpikeTrain]) -> Result<Vec<SpikeEvent>, SpikeError> {
    if let Some(first) = trains.first() {
        if let Some(bad) = trains.iter().find(|t| t.horizon != first.horizon) {
            return Err(SpikeError::HorizonMismatch { link: bad.link_id, expected: first.horizon, found: bad.horizon });
        }
    }
    let mut events: Vec<SpikeEvent> = trains
        .iter()
        .flat_map(|tr| tr.times.iter().map(move |&time| SpikeEvent { time, link_id: tr.link_id }))
        .collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.link_id.cmp(&b.link_id)));
    Ok(events)
}

/// Write trains as `time_ms,link_id` rows in merged order.
pub fn write_trains_csv<W: Write>(trains: &[SpikeTrain], out: W) -> Result<(), SpikeError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_ms", "link_id"])?;
    for e in merge_trains(trains)? {
        w.write_record([e.time.to_string(), e.link_id.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read trains written by [`write_trains_csv`]. `links` lists the ids to
/// return (a link with no rows yields an empty train); rows for other ids are
/// an error.
pub fn read_trains_csv<R: Read>(input: R, links: &[u64], horizon: f64) -> Result<Vec<SpikeTrain>, SpikeError> {
    let mut times: Vec<Vec<f64>> = vec![Vec::new(); links.len()];
    let mut r = csv::Reader::from_reader(input);
    for row in r.deserialize::<(f64, u64)>() {
        let (t, link) = row?;
        let slot = links
            .iter()
            .position(|&l| l == link)
            .ok_or_else(|| SpikeError::Train { link, reason: "link id not declared".into() })?;
        times[slot].push(t);
    }
    links.iter().zip(times).map(|(&link, ts)| SpikeTrain::new(link, ts, horizon)).collect()
}

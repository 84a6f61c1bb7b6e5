//! Fixed-rate time series and the smoothing applied ahead of analysis and
//! fuzzy inference.

use thiserror::Error;

/// Control-loop and logging rate used throughout the stack.
pub const DEFAULT_RATE_HZ: f64 = 50.0;

/// Window (in samples) of the moving average applied to torque and
/// shoulder-angle series.
pub const SMOOTHING_WINDOW: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("empty series")]
    EmptySeries,
    #[error("invalid window")]
    InvalidWindow,
    #[error("invalid sample rate {0} Hz")]
    InvalidRate(f64),
    #[error("invalid duration {0} s")]
    InvalidDuration(f64),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("invalid timestamp {0}")]
    InvalidTimestamp(f64),
    #[error("events not sorted by time at index {0}")]
    Unsorted(usize),
}

/// A value tagged with seconds since trial start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timestamped<V> {
    pub t: f64,
    pub value: V,
}

impl<V> Timestamped<V> {
    pub fn new(t: f64, value: V) -> Result<Self, SignalError> {
        if !t.is_finite() || t < 0.0 {
            return Err(SignalError::InvalidTimestamp(t));
        }
        Ok(Self { t, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRate {
    hz: f64,
}

impl SampleRate {
    pub fn new(hz: f64) -> Result<Self, SignalError> {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(SignalError::InvalidRate(hz));
        }
        Ok(Self { hz })
    }

    pub fn hz(self) -> f64 {
        self.hz
    }

    /// Tick duration in seconds.
    pub fn dt(self) -> f64 {
        1.0 / self.hz
    }
}

impl Default for SampleRate {
    fn default() -> Self {
        Self { hz: DEFAULT_RATE_HZ }
    }
}

/// Uniformly sampled scalar series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    rate: SampleRate,
    samples: Vec<f64>,
}

impl Series {
    pub fn new(rate: SampleRate, samples: Vec<f64>) -> Result<Self, SignalError> {
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        Ok(Self { rate, samples })
    }

    pub fn rate(&self) -> SampleRate {
        self.rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i` in seconds.
    pub fn time_of(&self, i: usize) -> f64 {
        i as f64 * self.rate.dt()
    }
}

/// Causal moving average with ramp-in: sample `i` is the mean of the last
/// `min(i + 1, window)` inputs, so the output keeps the input length.
pub fn moving_average(s: &Series, window: usize) -> Result<Series, SignalError> {
    if window == 0 {
        return Err(SignalError::InvalidWindow);
    }
    if s.is_empty() {
        return Err(SignalError::EmptySeries);
    }
    Ok(Series {
        rate: s.rate,
        samples: causal_mean(&s.samples, window),
    })
}

/// Slice form of [`moving_average`] for callers that already hold raw
/// samples. `window` must be non-zero.
pub fn causal_mean(samples: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0, "window must be positive");
    let mut out = Vec::with_capacity(samples.len());
    let mut filter = MovingAverage::new(window);
    for &x in samples {
        out.push(filter.push(x));
    }
    out
}

/// Online causal moving average, the streaming counterpart of
/// [`moving_average`].
#[derive(Debug, Clone)]
pub struct MovingAverage {
    window: usize,
    buf: Vec<f64>,
    head: usize,
    sum: f64,
    // Exact resum every `window` pushes keeps rounding drift bounded.
    since_resum: usize,
}

impl MovingAverage {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "window must be positive");
        Self {
            window,
            buf: Vec::with_capacity(window),
            head: 0,
            sum: 0.0,
            since_resum: 0,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn push(&mut self, x: f64) -> f64 {
        if self.buf.len() < self.window {
            self.buf.push(x);
            self.sum += x;
        } else {
            self.sum += x - self.buf[self.head];
            self.buf[self.head] = x;
            self.head = (self.head + 1) % self.window;
        }
        self.since_resum += 1;
        if self.since_resum >= self.window {
            self.sum = self.buf.iter().sum();
            self.since_resum = 0;
        }
        self.sum / self.buf.len() as f64
    }

    /// Current mean, or `None` before the first sample.
    pub fn value(&self) -> Option<f64> {
        if self.buf.is_empty() {
            None
        } else {
            Some(self.sum / self.buf.len() as f64)
        }
    }

    pub fn reset(&mut self) {
        self.buf.clear();
        self.head = 0;
        self.sum = 0.0;
        self.since_resum = 0;
    }
}

/// Zero-order-hold resampling of asynchronous events onto a uniform grid of
/// `ceil(duration * hz)` ticks. Ticks before the first event carry the
/// first event's value.
pub fn resample_zoh(
    events: &[Timestamped<f64>],
    rate: SampleRate,
    duration: f64,
) -> Result<Series, SignalError> {
    if events.is_empty() {
        return Err(SignalError::EmptySeries);
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(SignalError::InvalidDuration(duration));
    }
    for (i, pair) in events.windows(2).enumerate() {
        if pair[1].t < pair[0].t {
            return Err(SignalError::Unsorted(i + 1));
        }
    }
    if let Some(i) = events.iter().position(|e| !e.value.is_finite()) {
        return Err(SignalError::NonFinite(i));
    }

    let n = tick_count(duration, rate);
    let dt = rate.dt();
    let mut out = Vec::with_capacity(n);
    let mut next = 0usize;
    let mut current = events[0].value;
    for k in 0..n {
        let t = k as f64 * dt;
        // Small slack so events stamped exactly on a tick are not missed to
        // rounding of k * dt.
        while next < events.len() && events[next].t <= t + 1e-9 {
            current = events[next].value;
            next += 1;
        }
        out.push(current);
    }
    Ok(Series { rate, samples: out })
}

/// Number of ticks covering `duration` seconds, `ceil(duration * hz)`.
pub fn tick_count(duration: f64, rate: SampleRate) -> usize {
    let raw = duration * rate.hz();
    // Guard against 0.1 * 50 = 5.000000000000001 style products.
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

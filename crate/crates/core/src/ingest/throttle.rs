//! Request admission under a per-second rate and an optional UTC-day cap.
//!
//! Admission is scheduled, never refused: a request over the limit is given
//! a later admission time and the caller sleeps until then.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use thiserror::Error;

const DAY: Duration = Duration::from_secs(86_400);

/// Time source. Instants are durations since the Unix epoch, UTC.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep_until(&self, deadline: Duration);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default()
    }

    fn sleep_until(&self, deadline: Duration) {
        let now = self.now();
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
    }
}

/// Virtual clock: sleeping jumps time forward instantly.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
}

impl ManualClock {
    pub fn new(start: Duration) -> Self {
        Self { now: Mutex::new(start) }
    }

    pub fn set(&self, t: Duration) {
        *self.now.lock().expect("clock lock") = t;
    }

    pub fn advance(&self, by: Duration) {
        *self.now.lock().expect("clock lock") += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().expect("clock lock")
    }

    fn sleep_until(&self, deadline: Duration) {
        let mut now = self.now.lock().expect("clock lock");
        if deadline > *now {
            *now = deadline;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid rate limit: {0}")]
pub struct RateLimitError(String);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLimit {
    max_per_second: f64,
    max_per_day: Option<u64>,
}

impl RateLimit {
    pub fn new(max_per_second: f64, max_per_day: Option<u64>) -> Result<Self, RateLimitError> {
        if !(max_per_second.is_finite() && max_per_second > 0.0) {
            return Err(RateLimitError(format!("requests per second must be positive, got {max_per_second}")));
        }
        if max_per_day == Some(0) {
            return Err(RateLimitError("daily cap must be positive".into()));
        }
        Ok(Self { max_per_second, max_per_day })
    }

    pub fn per_second(&self) -> f64 {
        self.max_per_second
    }

    pub fn per_day(&self) -> Option<u64> {
        self.max_per_day
    }

    /// Most admissions any 1-second window may hold.
    pub fn burst(&self) -> usize {
        self.max_per_second.ceil() as usize
    }

    /// Span that must separate an admission from the one `burst` places
    /// earlier. At least one second; longer for fractional rates so the long
    /// run average stays at `max_per_second`.
    fn spacing(&self) -> Duration {
        Duration::from_secs_f64(self.burst() as f64 / self.max_per_second).max(Duration::from_secs(1))
    }
}

#[derive(Debug, Default)]
struct State {
    recent: VecDeque<Duration>,
    day: u64,
    day_count: u64,
    last: Option<Duration>,
    log: Vec<Duration>,
}

/// Shared admission gate for every explorer call in a run.
pub struct Throttle {
    limit: RateLimit,
    clock: Arc<dyn Clock>,
    state: Mutex<State>,
}

impl Throttle {
    pub fn new(limit: RateLimit, clock: Arc<dyn Clock>) -> Self {
        Self { limit, clock, state: Mutex::new(State::default()) }
    }

    pub fn limit(&self) -> RateLimit {
        self.limit
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    /// Reserves the earliest admission slot at or after `requested` and
    /// records it. Slots are handed out in request order.
    pub fn schedule(&self, requested: Duration) -> Duration {
        let mut st = self.state.lock().expect("throttle lock");
        let burst = self.limit.burst();
        let spacing = self.limit.spacing();
        let mut t = st.last.map_or(requested, |last| requested.max(last));
        loop {
            if let Some(cap) = self.limit.max_per_day {
                let day = t.as_secs() / DAY.as_secs();
                if day == st.day && st.day_count >= cap {
                    t = DAY * (day as u32 + 1);
                    continue;
                }
            }
            if st.recent.len() >= burst {
                let earliest = st.recent[st.recent.len() - burst] + spacing;
                if t < earliest {
                    t = earliest;
                    continue;
                }
            }
            break;
        }

        let day = t.as_secs() / DAY.as_secs();
        if day != st.day {
            st.day = day;
            st.day_count = 0;
        }
        st.day_count += 1;
        st.recent.push_back(t);
        while st.recent.len() > burst {
            st.recent.pop_front();
        }
        st.last = Some(t);
        st.log.push(t);
        t
    }

    /// Blocks until the caller may issue one request; returns the admission time.
    pub fn acquire(&self) -> Duration {
        let t = self.schedule(self.clock.now());
        self.clock.sleep_until(t);
        t
    }

    /// Every admission granted so far, in order.
    pub fn admission_log(&self) -> Vec<Duration> {
        self.state.lock().expect("throttle lock").log.clone()
    }
}

//! Sliding-window request limiter shared by the workers of one batch.

use std::collections::VecDeque;
use std::time::Duration;

use tokio::sync::Mutex;
use tokio::time::Instant;

#[derive(Debug)]
pub struct RateLimiter {
    limit: usize,
    window: Duration,
    sent: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    /// At most `limit` permits in any interval of length `window`.
    pub fn new(limit: u32, window: Duration) -> Self {
        RateLimiter {
            limit: limit.max(1) as usize,
            window,
            sent: Mutex::new(VecDeque::new()),
        }
    }

    pub fn per_minute(limit: u32) -> Self {
        RateLimiter::new(limit, Duration::from_secs(60))
    }

    pub fn window(&self) -> Duration {
        self.window
    }

    /// Waits until a request may be sent and records it. Waiters are served
    /// in arrival order because the lock is held while sleeping.
    pub async fn acquire(&self) {
        let mut sent = self.sent.lock().await;
        loop {
            let now = Instant::now();
            while sent.front().is_some_and(|&t| now.duration_since(t) >= self.window) {
                sent.pop_front();
            }
            if sent.len() < self.limit {
                sent.push_back(now);
                return;
            }
            let oldest = *sent.front().expect("window is full");
            tokio::time::sleep_until(oldest + self.window).await;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[tokio::test]
    async fn spaces_out_bursts() {
        let limiter = RateLimiter::new(2, Duration::from_millis(150));
        let start = Instant::now();
        let mut stamps = Vec::new();
        for _ in 0..5 {
            limiter.acquire().await;
            stamps.push(start.elapsed());
        }
        for i in 2..stamps.len() {
            assert!(stamps[i] - stamps[i - 2] >= Duration::from_millis(150), "{stamps:?}");
        }
        assert!(stamps[1] < Duration::from_millis(50));
    }
}

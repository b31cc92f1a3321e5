use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timing {
    pub reps: usize,
    pub warmup: usize,
}

impl Default for Timing {
    fn default() -> Self {
        Self { reps: 32, warmup: 4 }
    }
}

impl Timing {
    /// Median wall time of `f` in milliseconds.
    pub fn median_ms<T, F: FnMut() -> T>(&self, mut f: F) -> f64 {
        for _ in 0..self.warmup {
            std::hint::black_box(f());
        }
        let mut samples: Vec<f64> = (0..self.reps.max(1))
            .map(|_| {
                let start = Instant::now();
                std::hint::black_box(f());
                start.elapsed().as_secs_f64() * 1e3
            })
            .collect();
        samples.sort_by(f64::total_cmp);
        let mid = samples.len() / 2;
        if samples.len().is_multiple_of(2) {
            0.5 * (samples[mid - 1] + samples[mid])
        } else {
            samples[mid]
        }
    }
}

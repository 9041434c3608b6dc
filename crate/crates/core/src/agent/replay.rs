use rand::Rng;

use crate::env::Transition;
use crate::error::{Error, Result};

/// Fixed-capacity FIFO experience memory with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    /// Slot the next store overwrites once full.
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::new(),
            head: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn store(&mut self, transition: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(transition);
        } else {
            self.items[self.head] = transition;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// `n` storage slots drawn uniformly with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
        if self.items.len() < n || self.items.is_empty() {
            return Err(Error::UnderfilledBuffer {
                size: self.items.len(),
                requested: n,
            });
        }
        Ok((0..n).map(|_| rng.gen_range(0..self.items.len())).collect())
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<&Transition>> {
        Ok(self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| &self.items[i])
            .collect())
    }

    /// Stored transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items[self.head..]
            .iter()
            .chain(self.items[..self.head].iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn item(tag: usize) -> Transition {
        Transition {
            state: vec![tag as f64],
            action: 0,
            reward: 0.0,
            next_state: vec![0.0],
            duration: 1,
            terminal: false,
        }
    }

    #[test]
    fn evicts_oldest_first() {
        let mut buf = ReplayBuffer::new(2);
        for tag in 0..3 {
            buf.store(item(tag));
        }
        assert_eq!(buf.len(), 2);
        let tags: Vec<f64> = buf.iter().map(|t| t.state[0]).collect();
        assert_eq!(tags, vec![1.0, 2.0]);
        buf.store(item(3));
        let tags: Vec<f64> = buf.iter().map(|t| t.state[0]).collect();
        assert_eq!(tags, vec![2.0, 3.0]);
    }

    #[test]
    fn underfilled_sample_errors() {
        let mut buf = ReplayBuffer::new(10);
        buf.store(item(0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            buf.sample(2, &mut rng),
            Err(Error::UnderfilledBuffer {
                size: 1,
                requested: 2
            })
        ));
        assert!(buf.sample(1, &mut rng).is_ok());
    }

    #[test]
    fn same_seed_same_batch() {
        let mut buf = ReplayBuffer::new(100);
        for tag in 0..50 {
            buf.store(item(tag));
        }
        let a = buf
            .sample_indices(32, &mut ChaCha8Rng::seed_from_u64(4))
            .unwrap();
        let b = buf
            .sample_indices(32, &mut ChaCha8Rng::seed_from_u64(4))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_is_uniform_chi_square() {
        let mut buf = ReplayBuffer::new(10);
        for tag in 0..10 {
            buf.store(item(tag));
        }
        let mut counts = [0usize; 10];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 100_000;
        for _ in 0..draws / 10 {
            for i in buf.sample_indices(10, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        let expected = draws as f64 / 10.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 9 degrees of freedom, 99.9th percentile
        assert!(chi2 < 27.88, "chi2 = {chi2}");
        // and each cell within 3 sigma of its binomial mean
        let sigma = (draws as f64 * 0.1 * 0.9).sqrt();
        assert!(counts
            .iter()
            .all(|&c| (c as f64 - expected).abs() < 3.0 * sigma));
    }
}

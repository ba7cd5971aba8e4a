use rand::Rng;

use crate::env::Transition;

/// Fixed-capacity FIFO store of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    /// Slot the next push overwrites once the buffer is full.
    head: usize,
    pushed: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            head: 0,
            pushed: 0,
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

    /// Total number of transitions ever pushed.
    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
        self.pushed += 1;
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Indices of a uniformly drawn batch, distinct within the batch.
    pub fn sample_indices<R: Rng>(&self, rng: &mut R, batch: usize) -> Vec<usize> {
        rand::seq::index::sample(rng, self.items.len(), batch.min(self.items.len())).into_vec()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, batch: usize) -> Vec<&Transition> {
        self.sample_indices(rng, batch)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Action, Observation};
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(r: f64) -> Transition {
        let obs = Observation {
            mrp_error: Vector3::zeros(),
            omega: Vector3::zeros(),
        };
        Transition {
            obs,
            action: Action::zero(),
            reward: r,
            next_obs: obs,
            done: false,
            terminal: false,
            info: None,
        }
    }

    #[test]
    fn evicts_oldest_at_capacity() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(tr(i as f64));
        }
        assert_eq!(b.len(), 3);
        let mut rewards: Vec<f64> = b.iter().map(|t| t.reward).collect();
        rewards.sort_by(f64::total_cmp);
        assert_eq!(rewards, vec![2.0, 3.0, 4.0]);
        assert_eq!(b.pushed(), 5);
    }

    #[test]
    fn batch_has_no_repeats() {
        let mut b = ReplayBuffer::new(100);
        for i in 0..50 {
            b.push(tr(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut idx = b.sample_indices(&mut rng, 40);
        idx.sort();
        idx.dedup();
        assert_eq!(idx.len(), 40);
    }
}

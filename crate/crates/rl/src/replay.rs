//! Bounded ring of transitions with uniform sampling.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct BufferItem {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub done: bool,
}

#[derive(Debug)]
pub struct ReplayBuffer {
    items: Vec<BufferItem>,
    capacity: usize,
    write: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer { items: Vec::with_capacity(capacity.min(1 << 20)), capacity, write: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, item: BufferItem) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.write] = item;
            self.write = (self.write + 1) % self.capacity;
        }
    }

    pub fn get(&self, idx: usize) -> &BufferItem {
        &self.items[idx]
    }

    /// Uniform batch of indices into the stored items.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        (0..batch).map(|_| rng.random_range(0..self.items.len())).collect()
    }
}

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Named trainable tensors with matching gradient accumulators.
///
/// Iteration follows name order, which keeps optimizer updates and
/// checkpoints reproducible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterSet {
    values: BTreeMap<String, Tensor>,
    grads: BTreeMap<String, Tensor>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) {
        let name = name.into();
        self.grads.insert(name.clone(), Tensor::zeros(value.shape()));
        self.values.insert(name, value);
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.values
            .get(name)
            .ok_or_else(|| Error::invalid(format!("unknown parameter {name}")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.values
            .get_mut(name)
            .ok_or_else(|| Error::invalid(format!("unknown parameter {name}")))
    }

    pub fn grad(&self, name: &str) -> Result<&Tensor> {
        self.grads
            .get(name)
            .ok_or_else(|| Error::invalid(format!("unknown parameter {name}")))
    }

    pub(crate) fn grad_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.grads
            .get_mut(name)
            .ok_or_else(|| Error::invalid(format!("unknown parameter {name}")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Parameter tensors paired with their gradients.
    pub fn iter_with_grads_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor, &Tensor)> {
        self.values
            .iter_mut()
            .zip(self.grads.values())
            .map(|((k, v), g)| (k.as_str(), v, g))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total scalar count.
    pub fn n_scalars(&self) -> usize {
        self.values.values().map(Tensor::len).sum()
    }

    pub fn zero_grads(&mut self) {
        for g in self.grads.values_mut() {
            g.data_mut().fill(0.0);
        }
    }

    /// Overwrites every value with the one of the same name in `other`.
    pub fn copy_values_from(&mut self, other: &ParameterSet) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::invalid("parameter sets differ in size"));
        }
        for (name, v) in self.values.iter_mut() {
            let src = other.get(name)?;
            if src.shape() != v.shape() {
                return Err(Error::invalid(format!("shape mismatch for {name}")));
            }
            v.data_mut().copy_from_slice(src.data());
        }
        Ok(())
    }
}

/// Glorot-uniform tensor in ±√(6 / (fan_in + fan_out)).
pub fn glorot_init(shape: &[usize], rng_seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    glorot_init_with(shape, &mut rng)
}

pub fn glorot_init_with<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Tensor {
    let n: usize = shape.iter().product();
    if n == 0 {
        return Tensor::zeros(shape);
    }
    let (fan_in, fan_out) = match shape.len() {
        0 => (1, 1),
        1 => (shape[0], 1),
        _ => (shape[0], shape[1..].iter().product()),
    };
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
    Tensor::new(shape.to_vec(), data).expect("sized to shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_bounds_and_determinism() {
        let t = glorot_init(&[64, 32], 3);
        let bound = (6.0f64 / 96.0).sqrt();
        assert!(t.data().iter().all(|v| v.abs() <= bound));
        assert_eq!(t, glorot_init(&[64, 32], 3));
        assert_ne!(t, glorot_init(&[64, 32], 4));
        assert!(glorot_init(&[0, 32], 3).is_empty());
    }

    #[test]
    fn grads_track_shapes() {
        let mut p = ParameterSet::new();
        p.insert("b", Tensor::zeros(&[1, 4]));
        p.insert("a", Tensor::zeros(&[3, 4]));
        assert_eq!(p.names().collect::<Vec<_>>(), vec!["a", "b"]);
        for (name, v) in p.iter() {
            assert_eq!(p.grad(name).unwrap().shape(), v.shape());
        }
        assert_eq!(p.n_scalars(), 16);
    }
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::{Label, Segment};

/// Anything carrying a class label.
pub trait Labeled {
    fn label(&self) -> Label;
}

impl Labeled for Segment {
    fn label(&self) -> Label {
        self.label
    }
}

impl<L: Labeled> Labeled for &L {
    fn label(&self) -> Label {
        (*self).label()
    }
}

impl Labeled for Label {
    fn label(&self) -> Label {
        *self
    }
}

/// Seeded, label-stratified split into `(train, validation)`.
///
/// The validation side holds `round(fraction * N)` items. Each class contributes
/// `floor(fraction * n_class)` items, and the remaining slots go to the classes
/// with the largest fractional remainders, so a balanced set stays balanced on
/// both sides.
pub fn split_train_validation<S: Labeled>(
    items: Vec<S>,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<S>, Vec<S>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "validation fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n = items.len();
    let n_val = (fraction * n as f64).round() as usize;
    if n < 2 || n_val == 0 || n_val >= n {
        return Err(Error::Data(format!(
            "cannot split {n} items with validation fraction {fraction}: each side needs at least one"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<(Label, Vec<S>)> = Vec::new();
    for item in items {
        let label = item.label();
        match classes.iter_mut().find(|(l, _)| *l == label) {
            Some((_, v)) => v.push(item),
            None => classes.push((label, vec![item])),
        }
    }
    classes.sort_by_key(|(l, _)| *l);
    for (_, v) in &mut classes {
        v.shuffle(&mut rng);
    }

    let mut quota: Vec<usize> = classes
        .iter()
        .map(|(_, v)| (fraction * v.len() as f64).floor() as usize)
        .collect();
    let mut remaining = n_val - quota.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = fraction * classes[a].1.len() as f64 - quota[a] as f64;
        let rb = fraction * classes[b].1.len() as f64 - quota[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if quota[c] < classes[c].1.len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }

    let mut train = Vec::with_capacity(n - n_val);
    let mut val = Vec::with_capacity(n_val);
    for ((_, mut v), q) in classes.into_iter().zip(quota) {
        let rest = v.split_off(q);
        val.extend(v);
        train.extend(rest);
    }
    train.shuffle(&mut rng);
    val.shuffle(&mut rng);
    Ok((train, val))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(h: usize, f: usize) -> Vec<(usize, Label)> {
        (0..h)
            .map(|i| (i, Label::Healthy))
            .chain((h..h + f).map(|i| (i, Label::Faulty)))
            .collect()
    }

    impl Labeled for (usize, Label) {
        fn label(&self) -> Label {
            self.1
        }
    }

    #[test]
    fn sizes_and_stratification() {
        let (train, val) = split_train_validation(labels(50, 50), 0.2, 1).unwrap();
        assert_eq!((train.len(), val.len()), (80, 20));
        let vf = val.iter().filter(|x| x.1 == Label::Faulty).count();
        assert_eq!(vf, 10);
    }

    #[test]
    fn unbalanced_total_is_rounded() {
        let (train, val) = split_train_validation(labels(3, 3), 0.5, 1).unwrap();
        assert_eq!(val.len(), 3);
        assert_eq!(train.len(), 3);
        let (_, val) = split_train_validation(labels(7, 3), 0.2, 9).unwrap();
        assert_eq!(val.len(), 2);
    }

    #[test]
    fn deterministic_and_disjoint() {
        let a = split_train_validation(labels(30, 20), 0.2, 7).unwrap();
        let b = split_train_validation(labels(30, 20), 0.2, 7).unwrap();
        assert_eq!(a, b);
        let c = split_train_validation(labels(30, 20), 0.2, 8).unwrap();
        assert_ne!(a, c);
        let mut ids: Vec<usize> = a.0.iter().chain(&a.1).map(|x| x.0).collect();
        ids.sort();
        assert_eq!(ids, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn too_few() {
        assert!(split_train_validation(labels(1, 0), 0.2, 0).is_err());
        assert!(split_train_validation(labels(1, 1), 0.2, 0).is_err());
        assert!(split_train_validation(labels(5, 5), 0.0, 0).is_err());
        assert!(split_train_validation(labels(5, 5), 1.0, 0).is_err());
        assert!(split_train_validation(labels(1, 1), 0.5, 0).is_ok());
    }
}

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Row indices of one train/validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub val_groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSplit {
    pub folds: Vec<Fold>,
}

fn unique_groups(groups: &[String]) -> Vec<&str> {
    let mut seen = HashSet::new();
    groups.iter().filter(|g| seen.insert(g.as_str())).map(String::as_str).collect()
}

fn fold_from(groups: &[String], val_set: &HashSet<&str>) -> Fold {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        if val_set.contains(g.as_str()) {
            val.push(i);
        } else {
            train.push(i);
        }
    }
    let mut val_groups: Vec<String> = val_set.iter().map(|s| s.to_string()).collect();
    val_groups.sort();
    Fold { train, val, val_groups }
}

fn n_val_groups(n_groups: usize, n_folds: usize, val_frac: f64) -> Result<usize> {
    if n_folds == 0 || !(val_frac > 0.0 && val_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need n_folds >= 1 and 0 < val_frac < 1, got {n_folds} and {val_frac}"
        )));
    }
    if n_groups < n_folds.max(2) {
        return Err(Error::InvalidParameter(format!(
            "{n_groups} recordings are too few for {n_folds} folds"
        )));
    }
    Ok(((val_frac * n_groups as f64).ceil() as usize).clamp(1, n_groups - 1))
}

/// Independent random group splits: each fold sends `ceil(val_frac * groups)`
/// groups (recordings) to validation and the rest to training. `groups`
/// gives the group of every row.
pub fn group_shuffle_split(groups: &[String], n_folds: usize, val_frac: f64, seed: u64) -> Result<CvSplit> {
    let uniq = unique_groups(groups);
    let n_val = n_val_groups(uniq.len(), n_folds, val_frac)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let folds = (0..n_folds)
        .map(|_| {
            let mut order = uniq.clone();
            order.shuffle(&mut rng);
            fold_from(groups, &order[..n_val].iter().copied().collect())
        })
        .collect();
    Ok(CvSplit { folds })
}

/// As [`group_shuffle_split`], but a draw whose training or validation side
/// lacks one of the classes is redrawn. Labels are per row and assumed
/// constant within a group.
pub fn stratified_group_split(
    groups: &[String],
    labels: &[bool],
    n_folds: usize,
    val_frac: f64,
    seed: u64,
) -> Result<CvSplit> {
    const MAX_DRAWS: usize = 1000;
    let uniq = unique_groups(groups);
    let n_val = n_val_groups(uniq.len(), n_folds, val_frac)?;
    let mut group_label: HashMap<&str, bool> = HashMap::new();
    for (g, &l) in groups.iter().zip(labels) {
        group_label.insert(g.as_str(), l);
    }
    let has_both = |set: &[&str]| {
        let pos = set.iter().filter(|g| group_label[*g]).count();
        pos > 0 && pos < set.len()
    };
    if !has_both(&uniq) {
        return Err(Error::SingleClass("all recordings share one label".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = Vec::with_capacity(n_folds);
    for _ in 0..n_folds {
        let mut order = uniq.clone();
        let mut drawn = false;
        for _ in 0..MAX_DRAWS {
            order.shuffle(&mut rng);
            if has_both(&order[..n_val]) && has_both(&order[n_val..]) {
                drawn = true;
                break;
            }
        }
        if !drawn {
            return Err(Error::SingleClass(format!(
                "no split with both classes on each side after {MAX_DRAWS} draws"
            )));
        }
        folds.push(fold_from(groups, &order[..n_val].iter().copied().collect()));
    }
    Ok(CvSplit { folds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n_rec: usize, per: usize) -> Vec<String> {
        (0..n_rec).flat_map(|r| std::iter::repeat_n(format!("r{r}"), per)).collect()
    }

    #[test]
    fn ten_recordings_validate_two_each() {
        let g = rows(10, 3);
        let split = group_shuffle_split(&g, 5, 0.2, 42).unwrap();
        assert_eq!(split.folds.len(), 5);
        for f in &split.folds {
            assert_eq!(f.val_groups.len(), 2);
            assert_eq!(f.val.len(), 6);
            let train_groups: HashSet<&String> = f.train.iter().map(|&i| &g[i]).collect();
            assert!(f.val.iter().all(|&i| !train_groups.contains(&g[i])));
        }
        assert_eq!(split, group_shuffle_split(&g, 5, 0.2, 42).unwrap());
    }

    #[test]
    fn too_few_groups() {
        assert!(group_shuffle_split(&rows(4, 2), 5, 0.2, 0).is_err());
    }

    #[test]
    fn stratified_keeps_both_classes() {
        let g = rows(50, 2);
        let labels: Vec<bool> = (0..100).map(|i| i < 6).collect();
        let split = stratified_group_split(&g, &labels, 5, 0.2, 7).unwrap();
        for f in &split.folds {
            assert!(f.val.iter().any(|&i| labels[i]));
            assert!(f.train.iter().any(|&i| labels[i]));
        }
    }
}

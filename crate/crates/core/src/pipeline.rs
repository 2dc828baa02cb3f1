//! Preprocessing of raw basket transactions into two-category observations.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::error::{Error, Result};
use crate::estimate::Observation;

/// One purchased line item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub category: String,
    pub product_id: String,
    pub quantity: u32,
}

/// All items bought by one customer in one week.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTransaction {
    pub week: u32,
    pub customer_id: String,
    pub items: Vec<Item>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    week: u32,
    customer_id: String,
    category: String,
    product_id: String,
    quantity: u32,
}

impl RawTransaction {
    /// Distinct products bought from `category`, sorted.
    pub fn products_in(&self, category: &str) -> BTreeSet<&str> {
        self.items
            .iter()
            .filter(|it| it.category == category)
            .map(|it| it.product_id.as_str())
            .collect()
    }
}

/// Reads `week,customer_id,category,product_id,quantity` rows, grouped by (week, customer).
pub fn read_raw_csv(path: impl AsRef<Path>) -> Result<Vec<RawTransaction>> {
    let mut reader = csv::Reader::from_reader(std::fs::File::open(path)?);
    let mut grouped: BTreeMap<(u32, String), Vec<Item>> = BTreeMap::new();
    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row?;
        if row.quantity == 0 {
            return Err(Error::Data(format!("row {}: quantity must be at least 1", line + 2)));
        }
        grouped.entry((row.week, row.customer_id)).or_default().push(Item {
            category: row.category,
            product_id: row.product_id,
            quantity: row.quantity,
        });
    }
    Ok(grouped
        .into_iter()
        .map(|((week, customer_id), items)| RawTransaction {
            week,
            customer_id,
            items,
        })
        .collect())
}

pub fn write_raw_csv(path: impl AsRef<Path>, raw: &[RawTransaction]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for t in raw {
        for it in &t.items {
            writer.serialize(Row {
                week: t.week,
                customer_id: t.customer_id.clone(),
                category: it.category.clone(),
                product_id: it.product_id.clone(),
                quantity: it.quantity,
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Products of `category` bought in each week; weeks without such purchases map to an empty set.
pub fn infer_weekly_assortments(raw: &[RawTransaction], category: &str) -> BTreeMap<u32, BTreeSet<String>> {
    let mut weeks: BTreeMap<u32, BTreeSet<String>> = BTreeMap::new();
    for t in raw {
        let entry = weeks.entry(t.week).or_default();
        entry.extend(t.products_in(category).into_iter().map(str::to_string));
    }
    weeks
}

/// Products bought in at least `threshold` of the transactions that touch `category`.
pub fn filter_products(raw: &[RawTransaction], category: &str, threshold: f64) -> BTreeSet<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut touching = 0usize;
    for t in raw {
        let products = t.products_in(category);
        if !products.is_empty() {
            touching += 1;
        }
        for p in products {
            *counts.entry(p).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c as f64 >= threshold * touching as f64)
        .map(|(p, _)| p.to_string())
        .collect()
}

/// Drops items of `category` whose product is not in `keep`.
pub fn restrict(raw: &[RawTransaction], category: &str, keep: &BTreeSet<String>) -> Vec<RawTransaction> {
    raw.iter()
        .map(|t| RawTransaction {
            week: t.week,
            customer_id: t.customer_id.clone(),
            items: t
                .items
                .iter()
                .filter(|it| it.category != category || keep.contains(&it.product_id))
                .cloned()
                .collect(),
        })
        .collect()
}

/// One decomposed choice pair; `b` is `None` for no B purchase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PurchasePair {
    pub week: u32,
    pub a: String,
    pub b: Option<String>,
}

/// Splits every transaction with an A purchase into one pair per (A product, B product).
///
/// Transactions without a B purchase yield pairs with `b = None`; those
/// without an A purchase are dropped.
pub fn decompose_multi_purchase(raw: &[RawTransaction], cat_a: &str, cat_b: &str) -> Vec<PurchasePair> {
    let mut out = Vec::new();
    for t in raw {
        let bs: Vec<Option<String>> = {
            let b = t.products_in(cat_b);
            if b.is_empty() {
                vec![None]
            } else {
                b.into_iter().map(|p| Some(p.to_string())).collect()
            }
        };
        for a in t.products_in(cat_a) {
            for b in &bs {
                out.push(PurchasePair {
                    week: t.week,
                    a: a.to_string(),
                    b: b.clone(),
                });
            }
        }
    }
    out
}

/// Preprocessed two-category data with the product id maps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dataset {
    pub observations: Vec<Observation>,
    /// `products_a[k - 1]` is the raw id of A product `k`.
    pub products_a: Vec<String>,
    pub products_b: Vec<String>,
}

impl Dataset {
    pub fn n_a(&self) -> usize {
        self.products_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.products_b.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub category_a: String,
    pub category_b: String,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.10
}

fn index_map(ids: &BTreeSet<String>) -> BTreeMap<&str, usize> {
    ids.iter().enumerate().map(|(k, p)| (p.as_str(), k + 1)).collect()
}

/// Filtering, weekly assortment inference and multi-purchase decomposition.
pub fn build_dataset(raw: &[RawTransaction], opts: &PipelineOptions) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&opts.threshold) {
        return Err(Error::Config(format!("threshold must lie in [0, 1], got {}", opts.threshold)));
    }
    if opts.category_a == opts.category_b {
        return Err(Error::Config("the two categories must differ".into()));
    }
    let keep_a = filter_products(raw, &opts.category_a, opts.threshold);
    let keep_b = filter_products(raw, &opts.category_b, opts.threshold);
    let raw = restrict(&restrict(raw, &opts.category_a, &keep_a), &opts.category_b, &keep_b);
    let (ids_a, ids_b) = (index_map(&keep_a), index_map(&keep_b));
    let to_set = |weeks: BTreeMap<u32, BTreeSet<String>>, ids: &BTreeMap<&str, usize>| -> BTreeMap<u32, Assortment> {
        weeks
            .into_iter()
            .map(|(w, s)| (w, s.iter().map(|p| ids[p.as_str()]).collect()))
            .collect()
    };
    let weeks_a = to_set(infer_weekly_assortments(&raw, &opts.category_a), &ids_a);
    let weeks_b = to_set(infer_weekly_assortments(&raw, &opts.category_b), &ids_b);
    let observations = decompose_multi_purchase(&raw, &opts.category_a, &opts.category_b)
        .into_iter()
        .map(|p| Observation {
            s_a: weeks_a[&p.week].clone(),
            s_b: weeks_b[&p.week].clone(),
            a: ids_a[p.a.as_str()],
            b: p.b.map_or(0, |b| ids_b[b.as_str()]),
        })
        .collect();
    Ok(Dataset {
        observations,
        products_a: keep_a.into_iter().collect(),
        products_b: keep_b.into_iter().collect(),
    })
}

/// Writes observations as raw transactions, one customer per observation.
///
/// Product `k` becomes id `k`; observations with `a = 0` carry no A item
/// and are therefore dropped again on ingestion.
pub fn observations_to_raw(data: &[Observation], cat_a: &str, cat_b: &str, week_of: impl Fn(usize) -> u32) -> Vec<RawTransaction> {
    data.iter()
        .enumerate()
        .map(|(t, o)| {
            let mut items = Vec::new();
            for (cat, choice) in [(cat_a, o.a), (cat_b, o.b)] {
                if choice != 0 {
                    items.push(Item {
                        category: cat.to_string(),
                        product_id: choice.to_string(),
                        quantity: 1,
                    });
                }
            }
            RawTransaction {
                week: week_of(t),
                customer_id: format!("c{t}"),
                items,
            }
        })
        .collect()
}

/// Seeded shuffle, then the first `ceil(ratio * N)` items train.
pub fn train_test_split<T: Clone>(data: &[T], ratio: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Config(format!("split ratio must lie in [0, 1], got {ratio}")));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((ratio * data.len() as f64).ceil() as usize).min(data.len());
    let train = idx[..cut].iter().map(|&i| data[i].clone()).collect();
    let test = idx[cut..].iter().map(|&i| data[i].clone()).collect();
    Ok((train, test))
}

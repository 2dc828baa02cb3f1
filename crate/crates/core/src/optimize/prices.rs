use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::CrossCatModel;

#[derive(Deserialize)]
struct PriceRow {
    category: String,
    product_id: usize,
    price: f64,
}

/// Reads `category,product_id,price` rows into per-category price vectors in model order.
///
/// Every product needs exactly one price; option 0 is always free.
pub fn read_prices_csv<R: Read>(reader: R, model: &CrossCatModel) -> Result<Vec<Vec<f64>>> {
    let mut prices: Vec<Vec<Option<f64>>> = model
        .nodes()
        .iter()
        .map(|n| {
            let mut v = vec![None; n.n() + 1];
            v[0] = Some(0.0);
            v
        })
        .collect();
    for row in csv::Reader::from_reader(reader).deserialize::<PriceRow>() {
        let row = row?;
        let u = model
            .node_index(&row.category)
            .map_err(|_| Error::Data(format!("unknown category '{}'", row.category)))?;
        let slot = prices[u]
            .get_mut(row.product_id)
            .filter(|_| row.product_id > 0)
            .ok_or_else(|| Error::Data(format!("product {} is outside category {}", row.product_id, row.category)))?;
        if slot.is_some() || !row.price.is_finite() {
            return Err(Error::Data(format!(
                "duplicate or non-finite price for {}:{}",
                row.category, row.product_id
            )));
        }
        *slot = Some(row.price);
    }
    prices
        .into_iter()
        .zip(model.nodes())
        .map(|(v, node)| {
            v.into_iter()
                .enumerate()
                .map(|(j, p)| p.ok_or_else(|| Error::Data(format!("missing price for {}:{j}", node.id))))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::MnlModel;

    #[test]
    fn reads_and_validates() {
        let m = CrossCatModel::two_category(
            MnlModel::uniform(1),
            MnlModel::uniform(2),
            vec![vec![0.5, 0.25, 0.25]; 2],
        )
        .unwrap();
        let text = "category,product_id,price\nA,1,3.5\nB,2,1\nB,1,2\n";
        let p = read_prices_csv(text.as_bytes(), &m).unwrap();
        assert_eq!(p, vec![vec![0.0, 3.5], vec![0.0, 2.0, 1.0]]);
        assert!(read_prices_csv("category,product_id,price\nA,1,3\n".as_bytes(), &m).is_err());
        assert!(read_prices_csv("category,product_id,price\nC,1,3\n".as_bytes(), &m).is_err());
    }
}

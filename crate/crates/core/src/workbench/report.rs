use serde::Serialize;

use super::Dataset;
use crate::error::Result;
use crate::models::GibbsModel;
use crate::prediction::{average_expression, k_distribution, l_distribution, HpdInterval};

/// Estimates for one additional-sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictRow {
    pub m: usize,
    pub k_hat: f64,
    pub k_hpd: HpdInterval,
    pub l_hat: f64,
    pub l_hpd: HpdInterval,
    pub a_m: f64,
    pub a_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictReport {
    pub dataset: String,
    pub model: GibbsModel,
    pub n: usize,
    pub j: usize,
    pub level: f64,
    pub rows: Vec<PredictRow>,
}

/// Posterior means, HPD intervals and average expression levels for each
/// `m` in `m_list`. Values are unrounded; see [`PredictReport::to_table`].
pub fn predict_report(dataset: &Dataset, model: &GibbsModel, m_list: &[usize], level: f64) -> Result<PredictReport> {
    let sample = dataset.summary();
    let rows = m_list
        .iter()
        .map(|&m| {
            let k_dist = k_distribution(model, sample, m)?;
            let l_dist = l_distribution(model, sample, m)?;
            let (k_hat, l_hat) = (k_dist.mean(), l_dist.mean());
            let (a_m, a_total) = average_expression(sample, m, k_hat, l_hat)?;
            Ok(PredictRow {
                m,
                k_hat,
                k_hpd: k_dist.hpd(level)?,
                l_hat,
                l_hpd: l_dist.hpd(level)?,
                a_m,
                a_total,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PredictReport {
        dataset: dataset.name().to_string(),
        model: *model,
        n: dataset.n(),
        j: dataset.j(),
        level,
        rows,
    })
}

impl PredictReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Integers for the estimates of `K` and `L`, three decimals for the
    /// average expression levels.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>6} {:>6} {:>12} {:>6} {:>12} {:>7} {:>9}\n",
            "m", "K_hat", "K_hpd", "L_hat", "L_hpd", "A_m", "A_n+m"
        );
        for r in &self.rows {
            out += &format!(
                "{:>6} {:>6.0} {:>12} {:>6.0} {:>12} {:>7.3} {:>9.3}\n",
                r.m,
                r.k_hat,
                r.k_hpd.to_string(),
                r.l_hat,
                r.l_hpd.to_string(),
                r.a_m,
                r.a_total
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_m_list() {
        let d = Dataset::library1();
        let model = GibbsModel::poisson_dirichlet(0.34, 33.0).unwrap();
        let r = predict_report(&d, &model, &[], 0.95).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.to_table().lines().count(), 1);
    }

    #[test]
    fn text_rounds_json_does_not() {
        let d = Dataset::library1();
        let model = GibbsModel::poisson_dirichlet(0.34, 33.0).unwrap();
        let r = predict_report(&d, &model, &[100], 0.95).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let k = json["rows"][0]["k_hat"].as_f64().unwrap();
        assert_eq!(k, r.rows[0].k_hat);
        assert!(r.to_table().contains(&format!("{:.0}", k)));
    }
}

use serde::{Serialize, Serializer};

use super::{Direction, Mode, SplitwiseModel, StepAction};
use crate::encode::{describe_encoding, TransformPlan};
use crate::linmod::{Criterion, OlsFit, INTERCEPT};

/// `x` rounded to `digits` significant digits, trailing zeros dropped.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..15).contains(&exp) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(format!("{x:.decimals$}"))
}

/// Fixed decimals, then trailing zeros dropped: 132.50 prints as 132.5.
pub fn format_rounded(x: f64, decimals: usize) -> String {
    trim_zeros(format!("{x:.decimals$}"))
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') && !s.contains('e') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn format_pvalue(p: f64) -> String {
    if p < f64::EPSILON {
        "< 2.2e-16".into()
    } else {
        format_significant(p, 4)
    }
}

fn stars(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        p if p < 0.1 => ".",
        _ => "",
    }
}

fn right_aligned_row(cells: &[String], width: usize) -> String {
    let mut out = String::new();
    for c in cells {
        out.push_str(&format!("{c:>width$} "));
    }
    out
}

impl SplitwiseModel {
    /// Right-hand side as a model formula over the final design columns.
    pub fn call(&self) -> String {
        let cols: Vec<&str> = self.state.fit.column_names[1..].iter().map(String::as_str).collect();
        let rhs = if cols.is_empty() { "1".to_string() } else { cols.join(" + ") };
        format!("{} ~ {rhs}", self.response)
    }

    /// Human-readable report: coefficients, residual diagnostics, dummy encodings, criteria.
    pub fn summary(&self) -> String {
        let fit = &self.state.fit;
        let mut out = String::new();
        out.push_str(&format!("Call:\nlm(formula = {})\n\n", self.call()));

        out.push_str("Residuals:\n");
        let labels = ["Min", "1Q", "Median", "3Q", "Max"].map(String::from);
        let values = fit.residual_quantiles().map(|v| format!("{v:.4}"));
        let width = values.iter().map(String::len).max().unwrap_or(0).max(7);
        out.push_str(&right_aligned_row(&labels, width));
        out.push('\n');
        out.push_str(&right_aligned_row(&values, width));
        out.push_str("\n\n");

        out.push_str("Coefficients:\n");
        let name_w = fit.column_names.iter().map(String::len).max().unwrap_or(0);
        let coefs: Vec<String> = fit.coefficients.iter().map(|c| format!("{c:.6}")).collect();
        let coef_w = coefs.iter().map(String::len).max().unwrap_or(0);
        for ((name, coef), p) in fit.column_names.iter().zip(&coefs).zip(fit.p_values()) {
            let s = stars(p);
            let line = format!("{name:<name_w$} {coef:>coef_w$}");
            if s.is_empty() {
                out.push_str(&line);
            } else {
                out.push_str(&format!("{line} ({s})"));
            }
            out.push('\n');
        }
        out.push('\n');

        out.push_str(&format!(
            "Residual standard error: {} on {} degrees of freedom\n",
            format_significant(fit.sigma, 4),
            fit.df_resid
        ));
        out.push_str(&format!("Multiple R-squared:  {}\n", format_significant(fit.r2, 4)));
        out.push_str(&format!("Adjusted R-squared:  {}\n", format_significant(fit.adj_r2, 4)));
        if let (Some(f), Some(p)) = (fit.f_stat, fit.f_pvalue()) {
            out.push_str(&format!(
                "F-statistic: {} on {} and {} DF, p-value: {}\n",
                format_significant(f, 4),
                fit.k_coef - 1,
                fit.df_resid,
                format_pvalue(p)
            ));
        }
        out.push('\n');

        out.push_str("Dummy-Encoded Variables:\n");
        let lines: Vec<String> = self
            .encodings_considered
            .iter()
            .flat_map(|(var, enc)| describe_encoding(var, enc))
            .collect();
        if lines.is_empty() {
            out.push_str("- none\n");
        }
        for line in lines {
            out.push_str(&format!("- {line}\n"));
        }
        out.push('\n');

        out.push_str(&format!("Final AIC: {}\n", format_rounded(fit.aic, 2)));
        out.push_str(&format!("Final BIC: {}\n", format_rounded(fit.bic, 2)));
        out
    }

    /// Number of non-intercept design columns.
    pub fn n_terms(&self) -> usize {
        self.state
            .fit
            .column_names
            .iter()
            .filter(|c| *c != INTERCEPT)
            .count()
    }
}

#[derive(Serialize)]
struct ModelReport<'a> {
    mode: Mode,
    direction: Direction,
    criterion: Criterion,
    response: &'a str,
    call: String,
    selected_variables: Vec<String>,
    plan: &'a TransformPlan,
    encodings_considered: &'a TransformPlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_one: Option<&'a TransformPlan>,
    initial_plan: &'a TransformPlan,
    initial_criterion: f64,
    history: &'a [StepAction],
    criterion_value: f64,
    aic: f64,
    bic: f64,
    fit: &'a OlsFit,
    timing_s: f64,
    warnings: &'a [String],
}

impl Serialize for SplitwiseModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ModelReport {
            mode: self.config.mode,
            direction: self.config.direction,
            criterion: self.config.criterion,
            response: &self.response,
            call: self.call(),
            selected_variables: self.selected_variables(),
            plan: &self.state.plan,
            encodings_considered: &self.encodings_considered,
            phase_one: self.phase_one.as_ref(),
            initial_plan: &self.initial_plan,
            initial_criterion: self.initial_criterion,
            history: &self.history,
            criterion_value: self.state.criterion_value,
            aic: self.state.fit.aic,
            bic: self.state.fit.bic,
            fit: &self.state.fit,
            timing_s: self.timing_s,
            warnings: &self.warnings,
        }
        .serialize(serializer)
    }
}

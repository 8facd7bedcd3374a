use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layer widths of a fully connected autoencoder, input and output included.
///
/// The bottleneck is the unique narrowest layer. Written as a dash-separated
/// list such as `3-20-3-2-3-20-3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Architecture {
    widths: Vec<usize>,
    bottleneck: usize,
}

impl Architecture {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::Architecture(format!(
                "need at least 3 layers, got {}",
                widths.len()
            )));
        }
        if widths.contains(&0) {
            return Err(Error::Architecture("layer widths must be positive".into()));
        }
        let n = widths[0];
        if widths[widths.len() - 1] != n {
            return Err(Error::Architecture(format!(
                "input width {n} differs from output width {}",
                widths[widths.len() - 1]
            )));
        }
        let q = *widths.iter().min().expect("non-empty");
        let minima: Vec<usize> = (0..widths.len()).filter(|&i| widths[i] == q).collect();
        if minima.len() != 1 {
            return Err(Error::Architecture(format!(
                "bottleneck width {q} must be a unique minimum (q < n)"
            )));
        }
        Ok(Self {
            bottleneck: minima[0],
            widths,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn n_inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn bottleneck_index(&self) -> usize {
        self.bottleneck
    }

    /// Bottleneck width.
    pub fn q(&self) -> usize {
        self.widths[self.bottleneck]
    }

    /// Number of weight matrices.
    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    /// Widths from the input up to the layer just before the bottleneck.
    pub fn encoder_widths(&self) -> &[usize] {
        &self.widths[..self.bottleneck]
    }

    /// Widths from the layer just after the bottleneck to the output.
    pub fn decoder_widths(&self) -> &[usize] {
        &self.widths[self.bottleneck + 1..]
    }

    /// Checks the shape needed by the PCA initializations: every hidden width
    /// outside the bottleneck is at least `n`, and both neighbours of the
    /// bottleneck have width exactly `n`.
    pub fn check_vase(&self) -> Result<()> {
        let n = self.n_inputs();
        let b = self.bottleneck;
        if self.widths[b - 1] != n || self.widths[b + 1] != n {
            return Err(Error::Architecture(format!(
                "{self}: layers adjacent to the bottleneck must have width {n}"
            )));
        }
        if let Some(w) = self
            .widths
            .iter()
            .enumerate()
            .find(|&(i, &w)| i != b && w < n)
        {
            return Err(Error::Architecture(format!(
                "{self}: layer {} has width {} below the input width {n}",
                w.0, w.1
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Architecture {
    type Error = Error;

    fn try_from(widths: Vec<usize>) -> Result<Self> {
        Self::new(widths)
    }
}

impl From<Architecture> for Vec<usize> {
    fn from(a: Architecture) -> Self {
        a.widths
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let widths = s
            .split(['-', ','])
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Architecture(format!("bad width {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(widths)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.widths.iter().map(|w| w.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

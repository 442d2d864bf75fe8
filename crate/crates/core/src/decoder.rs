//! Decoder variants: plain or weighted BP on either check matrix, with or
//! without the matching fallback, and the standalone matching baseline.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bp::{BpConfig, BpDecoder, EdgeWeights, TannerGraph};
use crate::error::{Error, Result};
use crate::matching::BeliefMatcher;
use crate::nbp::{WeightKind, WeightSet};
use crate::noise::DepolarizingChannel;
use crate::pauli::{PauliVector, Syndrome};
use crate::toric::{MatrixKind, ToricCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Variant {
    Mwpm,
    Bp,
    BpMatch,
    Nbp,
    NbpMatch,
    Rnbp,
    RnbpMatch,
    ConvRnbp,
    ConvRnbpMatch,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::Mwpm,
        Variant::Bp,
        Variant::BpMatch,
        Variant::Nbp,
        Variant::NbpMatch,
        Variant::Rnbp,
        Variant::RnbpMatch,
        Variant::ConvRnbp,
        Variant::ConvRnbpMatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Mwpm => "mwpm",
            Variant::Bp => "bp",
            Variant::BpMatch => "bp+match",
            Variant::Nbp => "nbp",
            Variant::NbpMatch => "nbp+match",
            Variant::Rnbp => "rnbp",
            Variant::RnbpMatch => "rnbp+match",
            Variant::ConvRnbp => "conv-rnbp",
            Variant::ConvRnbpMatch => "conv-rnbp+match",
        }
    }

    /// Check matrix of the first stage; `None` for the matching baseline.
    pub fn matrix(self) -> Option<MatrixKind> {
        match self {
            Variant::Mwpm => None,
            Variant::Bp | Variant::BpMatch | Variant::Nbp | Variant::NbpMatch => Some(MatrixKind::Standard),
            _ => Some(MatrixKind::Overcomplete),
        }
    }

    pub fn uses_matching(self) -> bool {
        matches!(
            self,
            Variant::Mwpm | Variant::BpMatch | Variant::NbpMatch | Variant::RnbpMatch | Variant::ConvRnbpMatch
        )
    }

    pub fn needs_weights(self) -> bool {
        !matches!(self, Variant::Mwpm | Variant::Bp | Variant::BpMatch)
    }

    /// Weight kinds this variant accepts (a transferred conv set is dense).
    fn accepts(self, kind: WeightKind) -> bool {
        match self {
            Variant::ConvRnbp | Variant::ConvRnbpMatch => true,
            _ => kind == WeightKind::Dense,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown decoder variant '{s}'")))
    }
}

impl TryFrom<String> for Variant {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.name().to_string()
    }
}

/// Shared, immutable decoder description for one (code, ε, variant).
#[derive(Clone, Debug)]
pub struct Pipeline {
    code: Arc<ToricCode>,
    variant: Variant,
    channel: DepolarizingChannel,
    graph: Option<Arc<TannerGraph>>,
    weights: Option<Arc<EdgeWeights<f64>>>,
    bp: BpConfig,
    matcher: Option<Arc<BeliefMatcher>>,
}

/// Per-shot decoding result.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub correction: PauliVector,
    /// First-stage BP reproduced the syndrome (false for the baseline).
    pub converged: bool,
    pub bp_iterations: usize,
    /// Matching was run.
    pub stage2: bool,
}

impl Pipeline {
    /// `bp_iterations` overrides the default of `2 d` (or the weight set's `T`).
    pub fn new(
        code: Arc<ToricCode>,
        variant: Variant,
        channel: DepolarizingChannel,
        weights: Option<&WeightSet<f64>>,
        bp_iterations: Option<usize>,
    ) -> Result<Self> {
        let mut bp = BpConfig::for_distance(code.distance());
        let mut bound = None;
        match (variant.needs_weights(), weights) {
            (true, None) => {
                return Err(Error::Config(format!("variant {variant} needs a weights file")));
            }
            (false, Some(_)) => {
                return Err(Error::Config(format!("variant {variant} takes no weights")));
            }
            (true, Some(w)) => {
                if Some(w.matrix) != variant.matrix() {
                    return Err(Error::Weights(format!(
                        "variant {variant} runs on the {} matrix, weights were trained on {}",
                        variant.matrix().unwrap(),
                        w.matrix
                    )));
                }
                if !variant.accepts(w.kind) {
                    return Err(Error::Weights(format!("variant {variant} cannot use {} weights", w.kind)));
                }
                bp.max_iterations = w.iterations;
                bound = Some(Arc::new(w.bind(&code)?));
            }
            (false, None) => {}
        }
        if let Some(t) = bp_iterations {
            bp.max_iterations = t;
        }
        bp.validate()?;
        let graph = variant
            .matrix()
            .map(|m| Arc::new(TannerGraph::new(code.matrix(m))));
        if let (Some(w), Some(g)) = (&bound, &graph) {
            if w.num_edges() != g.num_edges() {
                return Err(Error::Dimension {
                    what: "weights vs Tanner graph",
                    expected: g.num_edges(),
                    got: w.num_edges(),
                });
            }
            if w.iterations().is_some_and(|t| t < bp.max_iterations) {
                return Err(Error::Weights(format!(
                    "weights cover {:?} iterations, decoder runs {}",
                    w.iterations(),
                    bp.max_iterations
                )));
            }
        }
        let matcher = variant
            .uses_matching()
            .then(|| Arc::new(BeliefMatcher::new(&code)));
        Ok(Pipeline {
            code,
            variant,
            channel,
            graph,
            weights: bound,
            bp,
            matcher,
        })
    }

    pub fn code(&self) -> &ToricCode {
        &self.code
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn channel(&self) -> &DepolarizingChannel {
        &self.channel
    }

    pub fn bp_config(&self) -> &BpConfig {
        &self.bp
    }

    /// Worker-local decoder with its own message buffers.
    pub fn decoder(&self) -> Result<ShotDecoder<'_>> {
        let bp = match &self.graph {
            Some(g) => Some(BpDecoder::new(Arc::clone(g), self.channel.prior(), self.bp)?),
            None => None,
        };
        Ok(ShotDecoder { pipe: self, bp })
    }
}

pub struct ShotDecoder<'a> {
    pipe: &'a Pipeline,
    bp: Option<BpDecoder<f64>>,
}

impl ShotDecoder<'_> {
    /// Decodes a standard-matrix syndrome.
    pub fn decode(&mut self, s: &Syndrome) -> Result<DecodeOutcome> {
        let p = self.pipe;
        let Some(bp) = self.bp.as_mut() else {
            let matcher = p.matcher.as_ref().expect("baseline has a matcher");
            return Ok(DecodeOutcome {
                correction: matcher.decode_prior(s, &p.channel)?,
                converged: false,
                bp_iterations: 0,
                stage2: true,
            });
        };
        let full;
        let s_bp = match p.variant.matrix() {
            Some(MatrixKind::Overcomplete) => {
                full = p.code.expand_syndrome(s)?;
                &full
            }
            _ => s,
        };
        let r = bp.decode(s_bp, p.weights.as_deref())?;
        if r.converged || p.matcher.is_none() {
            return Ok(DecodeOutcome {
                correction: r.hard_decision,
                converged: r.converged,
                bp_iterations: r.iterations_used,
                stage2: false,
            });
        }
        let correction = p.matcher.as_ref().unwrap().decode(s, &r.marginals)?;
        Ok(DecodeOutcome {
            correction,
            converged: false,
            bp_iterations: r.iterations_used,
            stage2: true,
        })
    }
}

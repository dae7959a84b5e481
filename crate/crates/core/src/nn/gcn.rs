use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{dropout_mask, log_softmax, nll_with_grad, relu, relu_backward, Dense, DenseGrad};
use super::{CsrMatrix, DenseMatrix};
use crate::error::{Error, Result};

/// Two graph-convolution layers followed by a linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub layer0: Dense,
    pub layer1: Dense,
    pub head: Dense,
    pub dropout: f64,
}

impl GcnModel {
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, classes: usize, dropout: f64, rng: &mut R) -> Self {
        Self {
            layer0: Dense::init(input_dim, hidden, rng),
            layer1: Dense::init(hidden, hidden, rng),
            head: Dense::init(hidden, classes, rng),
            dropout,
        }
    }

    pub fn zeros(input_dim: usize, hidden: usize, classes: usize) -> Self {
        Self {
            layer0: Dense::zeros(input_dim, hidden),
            layer1: Dense::zeros(hidden, hidden),
            head: Dense::zeros(hidden, classes),
            dropout: 0.5,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer0.fan_in()
    }

    pub fn hidden(&self) -> usize {
        self.layer0.fan_out()
    }

    pub fn class_count(&self) -> usize {
        self.head.fan_out()
    }

    pub fn param_sizes(&self) -> Vec<usize> {
        self.params().iter().map(|p| p.len()).collect()
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut v = Vec::with_capacity(6);
        v.extend(self.layer0.params());
        v.extend(self.layer1.params());
        v.extend(self.head.params());
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = Vec::with_capacity(6);
        v.extend(self.layer0.params_mut());
        v.extend(self.layer1.params_mut());
        v.extend(self.head.params_mut());
        v
    }

    fn check_shapes(&self) -> Result<()> {
        if self.layer1.fan_in() != self.hidden()
            || self.head.fan_in() != self.layer1.fan_out()
            || self.class_count() < 2
        {
            return Err(Error::invalid("inconsistent GCN layer shapes"));
        }
        Ok(())
    }
}

/// The propagation operator together with `S·X`, which is constant across
/// epochs and computed once.
#[derive(Debug, Clone)]
pub struct GraphInput<'a> {
    pub s: &'a CsrMatrix,
    pub sx: DenseMatrix,
}

impl<'a> GraphInput<'a> {
    pub fn new(s: &'a CsrMatrix, x: &DenseMatrix) -> Result<Self> {
        if x.rows() != s.dim() {
            return Err(Error::invalid(format!(
                "feature matrix has {} rows, graph has {} nodes",
                x.rows(),
                s.dim()
            )));
        }
        x.ensure_finite("node features")?;
        Ok(Self { s, sx: s.matmul(x) })
    }

    pub fn node_count(&self) -> usize {
        self.sx.rows()
    }
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct GcnCache {
    z1: DenseMatrix,
    mask1: Option<DenseMatrix>,
    h1: DenseMatrix,
    p1: DenseMatrix,
    z2: DenseMatrix,
    mask2: Option<DenseMatrix>,
    h2: DenseMatrix,
    pub log_probs: DenseMatrix,
}

/// Forward pass. Dropout is applied only when an RNG is supplied.
pub fn gcn_forward<R: Rng>(model: &GcnModel, input: &GraphInput<'_>, dropout_rng: Option<&mut R>) -> Result<GcnCache> {
    model.check_shapes()?;
    if input.sx.cols() != model.input_dim() {
        return Err(Error::FeatureMismatch {
            expected: vec![model.input_dim().to_string()],
            found: vec![input.sx.cols().to_string()],
        });
    }
    let n = input.node_count();
    let h = model.hidden();
    let (mask1, mask2) = match dropout_rng {
        Some(rng) if model.dropout > 0.0 => (
            Some(dropout_mask(n, h, model.dropout, rng)),
            Some(dropout_mask(n, model.layer1.fan_out(), model.dropout, rng)),
        ),
        _ => (None, None),
    };

    let z1 = model.layer0.forward(&input.sx);
    let mut h1 = relu(&z1);
    if let Some(m) = &mask1 {
        h1.hadamard_in_place(m);
    }
    let p1 = input.s.matmul(&h1);
    let z2 = model.layer1.forward(&p1);
    let mut h2 = relu(&z2);
    if let Some(m) = &mask2 {
        h2.hadamard_in_place(m);
    }
    let log_probs = log_softmax(&model.head.forward(&h2));
    log_probs.ensure_finite("GCN output")?;
    Ok(GcnCache {
        z1,
        mask1,
        h1,
        p1,
        z2,
        mask2,
        h2,
        log_probs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnGrads {
    pub layer0: DenseGrad,
    pub layer1: DenseGrad,
    pub head: DenseGrad,
}

impl GcnGrads {
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut v = Vec::with_capacity(6);
        v.extend(self.layer0.slices());
        v.extend(self.layer1.slices());
        v.extend(self.head.slices());
        v
    }
}

/// Mean NLL over `rows` (with class `targets`) and its gradients.
pub fn loss_and_grad<R: Rng>(
    model: &GcnModel,
    input: &GraphInput<'_>,
    rows: &[usize],
    targets: &[usize],
    dropout_rng: Option<&mut R>,
) -> Result<(f64, GcnGrads)> {
    if rows.is_empty() {
        return Err(Error::invalid("loss mask selects no nodes"));
    }
    if rows.len() != targets.len() || targets.iter().any(|&t| t >= model.class_count()) {
        return Err(Error::invalid("targets do not match mask or class count"));
    }
    let cache = gcn_forward(model, input, dropout_rng)?;
    Ok(backward(model, input, &cache, rows, targets))
}

pub(crate) fn backward(
    model: &GcnModel,
    input: &GraphInput<'_>,
    cache: &GcnCache,
    rows: &[usize],
    targets: &[usize],
) -> (f64, GcnGrads) {
    let (loss, d_logits) = nll_with_grad(&cache.log_probs, rows, targets);

    let head = model.head.param_grad(&cache.h2, &d_logits);
    let mut d_z2 = model.head.input_grad(&d_logits);
    if let Some(m) = &cache.mask2 {
        d_z2.hadamard_in_place(m);
    }
    relu_backward(&cache.z2, &mut d_z2);

    let layer1 = model.layer1.param_grad(&cache.p1, &d_z2);
    let d_p1 = model.layer1.input_grad(&d_z2);
    // S is symmetric, so Sᵀ·g = S·g.
    let mut d_z1 = input.s.matmul(&d_p1);
    if let Some(m) = &cache.mask1 {
        d_z1.hadamard_in_place(m);
    }
    relu_backward(&cache.z1, &mut d_z1);
    debug_assert_eq!(cache.h1.shape(), d_z1.shape());

    let layer0 = model.layer0.param_grad(&input.sx, &d_z1);
    (loss, GcnGrads { layer0, layer1, head })
}

/// Mean NLL over `rows` without dropout.
pub fn eval_loss(model: &GcnModel, input: &GraphInput<'_>, rows: &[usize], targets: &[usize]) -> Result<f64> {
    let cache = gcn_forward::<rand_chacha::ChaCha8Rng>(model, input, None)?;
    Ok(nll_with_grad(&cache.log_probs, rows, targets).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type NoRng = ChaCha8Rng;

    #[test]
    fn zero_weights_give_uniform_output() {
        let s = CsrMatrix::from_triplets(3, (0..3).map(|i| (i, i, 1.0)));
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, -1.0], vec![3.0, 3.0]]).unwrap();
        let input = GraphInput::new(&s, &x).unwrap();
        let m = GcnModel::zeros(2, 4, 3);
        let out = gcn_forward::<NoRng>(&m, &input, None).unwrap();
        for v in out.log_probs.data() {
            assert!((v - (1.0f64 / 3.0).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_computed_two_node_pass() {
        // Identity propagation, one feature, hidden width 1.
        let s = CsrMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, 1.0)]);
        let x = DenseMatrix::from_rows(&[vec![1.0], vec![-2.0]]).unwrap();
        let input = GraphInput::new(&s, &x).unwrap();
        let mut m = GcnModel::zeros(1, 1, 2);
        m.layer0.weight.set(0, 0, 2.0);
        m.layer1.weight.set(0, 0, 3.0);
        m.layer1.bias[0] = 1.0;
        m.head.weight.set(0, 0, 1.0);
        m.head.weight.set(0, 1, -1.0);
        let out = gcn_forward::<NoRng>(&m, &input, None).unwrap().log_probs;
        // node 0: h1 = 2, h2 = 7, logits (7, -7)
        let lse0 = 7.0 + (1.0 + (-14.0f64).exp()).ln();
        assert!((out.get(0, 0) - (7.0 - lse0)).abs() < 1e-12);
        // node 1: h1 = relu(-4) = 0, h2 = relu(1) = 1, logits (1, -1)
        let lse1 = 1.0 + (1.0 + (-2.0f64).exp()).ln();
        assert!((out.get(1, 1) - (-1.0 - lse1)).abs() < 1e-12);
    }

    #[test]
    fn empty_mask_rejected() {
        let s = CsrMatrix::from_triplets(1, [(0, 0, 1.0)]);
        let x = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let input = GraphInput::new(&s, &x).unwrap();
        let m = GcnModel::zeros(1, 2, 2);
        assert!(loss_and_grad::<NoRng>(&m, &input, &[], &[], None).is_err());
    }

    #[test]
    fn non_finite_features_rejected() {
        let s = CsrMatrix::from_triplets(1, [(0, 0, 1.0)]);
        let x = DenseMatrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(GraphInput::new(&s, &x).is_err());
    }

    #[test]
    fn confident_correct_predictions_have_near_zero_loss() {
        let s = CsrMatrix::from_triplets(1, [(0, 0, 1.0)]);
        let x = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let input = GraphInput::new(&s, &x).unwrap();
        let mut m = GcnModel::zeros(1, 1, 2);
        m.layer0.weight.set(0, 0, 1.0);
        m.layer1.weight.set(0, 0, 1.0);
        m.head.bias = vec![800.0, 0.0];
        let (loss, g) = loss_and_grad::<NoRng>(&m, &input, &[0], &[0], None).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.head.weight.data().iter().all(|&v| v == 0.0));
        assert!(g.head.bias.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dropout_changes_training_pass_only() {
        let s = CsrMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, 1.0)]);
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![-0.3, 2.0]]).unwrap();
        let input = GraphInput::new(&s, &x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = GcnModel::init(2, 16, 2, 0.5, &mut rng);
        let a = gcn_forward::<NoRng>(&m, &input, None).unwrap().log_probs;
        let b = gcn_forward::<NoRng>(&m, &input, None).unwrap().log_probs;
        assert_eq!(a, b);
        let c = gcn_forward(&m, &input, Some(&mut rng)).unwrap().log_probs;
        assert_ne!(a, c);
    }
}

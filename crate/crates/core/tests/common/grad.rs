//! Finite-difference gradient checks for every differentiable component.
//! Each case returns the largest relative error over all coordinates.

use ndarray::{Array1, Array2};
use rand::Rng;

use stcluster::autoencoder::AutoencoderModel;
use stcluster::gae::{gcn_backward, gcn_forward, gcn_forward_cached, pair_bce_loss, GcnLayer};
use stcluster::graph::{normalize_adjacency, TextGraph};
use stcluster::nn::{backward, forward, mse_loss, Activation, DenseLayer, NetworkSpec};
use stcluster::sca::{kl_loss, soft_assign, soft_assign_backward, target_distribution};

use super::{fd_max_rel_err, random_edges, random_matrix, rng};

fn random_sizes(rng: &mut impl Rng) -> Vec<usize> {
    let layers = rng.random_range(1..=3);
    (0..=layers).map(|_| rng.random_range(1..=20)).collect()
}

fn random_activation(rng: &mut impl Rng) -> Activation {
    if rng.random_bool(0.5) {
        Activation::Relu
    } else {
        Activation::Linear
    }
}

fn flatten_dense(layers: &[DenseLayer<f64>]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
        .collect()
}

fn unflatten_dense(template: &[DenseLayer<f64>], flat: &[f64]) -> Vec<DenseLayer<f64>> {
    let mut at = 0;
    template
        .iter()
        .map(|l| {
            let (r, c) = l.weights.dim();
            let w = Array2::from_shape_vec((r, c), flat[at..at + r * c].to_vec()).unwrap();
            at += r * c;
            let b = Array1::from(flat[at..at + c].to_vec());
            at += c;
            DenseLayer::new(w, b, l.activation).unwrap()
        })
        .collect()
}

/// Random dense network under MSE against a random target. Checks parameter
/// and input gradients.
pub fn mlp_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let sizes = random_sizes(&mut r);
    let layers: Vec<DenseLayer<f64>> = sizes
        .windows(2)
        .map(|w| {
            let act = random_activation(&mut r);
            DenseLayer::new(random_matrix(w[0], w[1], &mut r), Array1::from_shape_simple_fn(w[1], || r.random_range(-0.5..0.5)), act)
                .unwrap()
        })
        .collect();
    let n = r.random_range(1..=6);
    let mut x = random_matrix(n, sizes[0], &mut r);
    let target = random_matrix(n, *sizes.last().unwrap(), &mut r);

    let acts = forward(&layers, x.view()).unwrap();
    let (_, g) = mse_loss(target.view(), acts.last().unwrap().view()).unwrap();
    let (grads, x_grad) = backward(&layers, &acts, g.view()).unwrap();
    let analytic: Vec<f64> = grads
        .iter()
        .flat_map(|g| g.weights.iter().chain(g.bias.iter()).copied())
        .collect();
    let mut params = flatten_dense(&layers);
    let param_err = fd_max_rel_err(&mut params, &analytic, |p| {
        let net = unflatten_dense(&layers, p);
        let out = forward(&net, x.view()).unwrap().pop().unwrap();
        mse_loss(target.view(), out.view()).unwrap().0
    });
    let x_analytic: Vec<f64> = x_grad.iter().copied().collect();
    let mut flat_x: Vec<f64> = x.iter().copied().collect();
    let input_err = fd_max_rel_err(&mut flat_x, &x_analytic, |v| {
        x.as_slice_mut().unwrap().copy_from_slice(v);
        let out = forward(&layers, x.view()).unwrap().pop().unwrap();
        mse_loss(target.view(), out.view()).unwrap().0
    });
    param_err.max(input_err)
}

/// Full autoencoder reconstruction loss. With tied weights the shared
/// matrix receives the sum of its encoder and decoder gradients.
pub fn autoencoder_case(seed: u64, tied: bool) -> f64 {
    let mut r = rng(seed);
    let d = r.random_range(4..=12);
    let hidden = r.random_range(2..d);
    let latent = r.random_range(1..hidden.max(2));
    let mut spec = NetworkSpec::new(vec![d, hidden, latent]).unwrap();
    spec.tied_decoder = tied;
    let mut model = AutoencoderModel::<f64>::init(&spec, seed).unwrap();
    // Nonzero biases keep every ReLU input away from its kink.
    for layer in model.encoder.iter_mut().chain(model.decoder.iter_mut()) {
        layer.bias.mapv_inplace(|_| r.random_range(-0.5..0.5));
    }
    let x = random_matrix(r.random_range(2..=6), d, &mut r);
    let (_, enc_g, dec_g) = model.loss_and_grads(x.view()).unwrap();
    let depth = model.encoder.len();

    let mut params = Vec::new();
    let mut analytic = Vec::new();
    for (l, (layer, g)) in model.encoder.iter().zip(&enc_g).enumerate() {
        let mirror = depth - 1 - l;
        for ((i, j), &w) in layer.weights.indexed_iter() {
            params.push(w);
            let tied_part = if tied { dec_g[mirror].weights[[j, i]] } else { 0.0 };
            analytic.push(g.weights[[i, j]] + tied_part);
        }
        params.extend(layer.bias.iter());
        analytic.extend(g.bias.iter());
    }
    for (layer, g) in model.decoder.iter().zip(&dec_g) {
        if !tied {
            params.extend(layer.weights.iter());
            analytic.extend(g.weights.iter());
        }
        params.extend(layer.bias.iter());
        analytic.extend(g.bias.iter());
    }

    let rebuild = |p: &[f64]| {
        let mut m = model.clone();
        let mut at = 0;
        for l in 0..depth {
            let len = m.encoder[l].weights.len();
            m.encoder[l].weights.as_slice_mut().unwrap().copy_from_slice(&p[at..at + len]);
            at += len;
            let len = m.encoder[l].bias.len();
            m.encoder[l].bias.as_slice_mut().unwrap().copy_from_slice(&p[at..at + len]);
            at += len;
        }
        for l in 0..depth {
            if tied {
                m.decoder[l].weights = m.encoder[depth - 1 - l].weights.t().to_owned();
            } else {
                let len = m.decoder[l].weights.len();
                m.decoder[l].weights.as_slice_mut().unwrap().copy_from_slice(&p[at..at + len]);
                at += len;
            }
            let len = m.decoder[l].bias.len();
            m.decoder[l].bias.as_slice_mut().unwrap().copy_from_slice(&p[at..at + len]);
            at += len;
        }
        m
    };
    fd_max_rel_err(&mut params, &analytic, |p| rebuild(p).reconstruction_loss(x.view()).unwrap())
}

/// Random GCN stack on a random graph; the loss is `sum(Z * R)` for a fixed
/// random `R`.
pub fn gcn_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = r.random_range(2..=12);
    let g = TextGraph::from_edges(n, random_edges(n, 0.3, &mut r)).unwrap();
    let adj = normalize_adjacency(&g);
    let sizes = random_sizes(&mut r);
    let layers: Vec<GcnLayer<f64>> = sizes
        .windows(2)
        .map(|w| GcnLayer {
            weights: random_matrix(w[0], w[1], &mut r),
            activation: random_activation(&mut r),
        })
        .collect();
    let mut x = random_matrix(n, sizes[0], &mut r);
    let weight = random_matrix(n, *sizes.last().unwrap(), &mut r);
    let objective = |z: Array2<f64>| (&z * &weight).sum();

    let acts = gcn_forward_cached(&adj, x.view(), &layers).unwrap();
    let (grads, x_grad) = gcn_backward(&adj, &layers, &acts, weight.view()).unwrap();
    let analytic: Vec<f64> = grads.iter().flat_map(|g| g.iter().copied()).collect();
    let mut params: Vec<f64> = layers.iter().flat_map(|l| l.weights.iter().copied()).collect();
    let param_err = fd_max_rel_err(&mut params, &analytic, |p| {
        let mut at = 0;
        let net: Vec<GcnLayer<f64>> = layers
            .iter()
            .map(|l| {
                let len = l.weights.len();
                let w = Array2::from_shape_vec(l.weights.dim(), p[at..at + len].to_vec()).unwrap();
                at += len;
                GcnLayer {
                    weights: w,
                    activation: l.activation,
                }
            })
            .collect();
        objective(gcn_forward(&adj, x.view(), &net).unwrap())
    });
    let x_analytic: Vec<f64> = x_grad.iter().copied().collect();
    let mut flat_x: Vec<f64> = x.iter().copied().collect();
    let input_err = fd_max_rel_err(&mut flat_x, &x_analytic, |v| {
        x.as_slice_mut().unwrap().copy_from_slice(v);
        objective(gcn_forward(&adj, x.view(), &layers).unwrap())
    });
    param_err.max(input_err)
}

/// `KL(P || Q(Z, U))` with `P` held fixed, differentiated w.r.t. both the
/// latent codes and the centroids.
pub fn kl_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = r.random_range(1..=8);
    let k = r.random_range(2..=4);
    let d = r.random_range(1..=5);
    let z = random_matrix(n, d, &mut r);
    let u = random_matrix(k, d, &mut r);
    let p = target_distribution(soft_assign(z.view(), u.view()).unwrap().view());
    let loss = |z: &Array2<f64>, u: &Array2<f64>| {
        let q = soft_assign(z.view(), u.view()).unwrap();
        kl_loss(p.view(), q.view()).unwrap().0
    };
    let q = soft_assign(z.view(), u.view()).unwrap();
    let (_, q_grad) = kl_loss(p.view(), q.view()).unwrap();
    let (z_grad, u_grad) = soft_assign_backward(z.view(), u.view(), q_grad.view()).unwrap();

    let mut flat: Vec<f64> = z.iter().chain(u.iter()).copied().collect();
    let analytic: Vec<f64> = z_grad.iter().chain(u_grad.iter()).copied().collect();
    fd_max_rel_err(&mut flat, &analytic, |v| {
        let zz = Array2::from_shape_vec(z.dim(), v[..z.len()].to_vec()).unwrap();
        let uu = Array2::from_shape_vec(u.dim(), v[z.len()..].to_vec()).unwrap();
        loss(&zz, &uu)
    })
}

/// Inner-product decoder BCE over a random graph's edges and an equal
/// number of random non-edges.
pub fn gae_bce_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = r.random_range(4..=10);
    let mut edges = random_edges(n, 0.4, &mut r);
    if edges.is_empty() {
        edges.push((0, 1));
    }
    let g = TextGraph::from_edges(n, edges).unwrap();
    let mut negatives = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !g.has_edge(i, j) && negatives.len() < g.num_edges() {
                negatives.push((i, j));
            }
        }
    }
    let z = random_matrix(n, r.random_range(1..=4), &mut r);
    let (_, grad) = pair_bce_loss(z.view(), g.edges(), &negatives).unwrap();
    let mut flat: Vec<f64> = z.iter().copied().collect();
    let analytic: Vec<f64> = grad.iter().copied().collect();
    fd_max_rel_err(&mut flat, &analytic, |v| {
        let zz = Array2::from_shape_vec(z.dim(), v.to_vec()).unwrap();
        pair_bce_loss(zz.view(), g.edges(), &negatives).unwrap().0
    })
}

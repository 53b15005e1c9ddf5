//! The three Hamiltonian-level models and the parameter maps between them.
//!
//! All quantities are in recoil units (ħ = k = 1, energies and rates in
//! ω_R). The ring model lives on (MomentumLattice, MomentumLattice, Fock);
//! the linearized model on (Fock, Fock, Fock) with the field last; the toy
//! model on the two-oscillator space with the field eliminated.

use crate::hilbert::{
    annihilation_operator, kinetic_operator, number_operator, tensor, trig_operator, Factor,
    SpaceDescriptor, SparseOperator, StateVector, TrigKind, C64,
};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Ring-cavity model parameters (recoil units).
#[derive(Debug, Clone, PartialEq)]
pub struct RingParams {
    /// Pump amplitude α_c of the coherently driven cosine mode.
    pub alpha_c: f64,
    /// Optical potential depth per photon U₀ (< 0 in the stable regime).
    pub u0: f64,
    /// Pump–cavity detuning Δ_c (< 0 in the cooling regime).
    pub delta_c: f64,
    /// Cavity linewidth κ (> 0).
    pub kappa: f64,
}

impl RingParams {
    /// Stable-regime constructor: U₀ < 0 and Δ_c < 0 are enforced.
    ///
    /// α_c ≫ 1 underpins the coherent-pump approximation; small values are
    /// accepted with a warning (α_c = 0 is the meaningful "pump off" case).
    pub fn new(alpha_c: f64, u0: f64, delta_c: f64, kappa: f64) -> Result<Self> {
        if !(alpha_c >= 0.0) {
            return Err(Error::InvalidParams(format!("alpha_c = {alpha_c} must be ≥ 0")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParams(format!("kappa = {kappa} must be > 0")));
        }
        if !(u0 < 0.0) {
            return Err(Error::UnstableRegime(format!("U0 = {u0} must be < 0")));
        }
        if !(delta_c < 0.0) {
            return Err(Error::UnstableRegime(format!(
                "delta_c = {delta_c} must be < 0 (red detuning)"
            )));
        }
        if alpha_c < 10.0 {
            log::warn!(
                "alpha_c = {alpha_c} is small; the coherent-pump approximation wants alpha_c >> 1"
            );
        }
        Ok(RingParams { alpha_c, u0, delta_c, kappa })
    }

    /// Explicit opt-out of the stable-regime checks (blue detuning or
    /// repulsive potential); κ > 0 is still required.
    pub fn new_unstable(alpha_c: f64, u0: f64, delta_c: f64, kappa: f64) -> Result<Self> {
        if !(alpha_c >= 0.0) || !(kappa > 0.0) {
            return Err(Error::InvalidParams(
                "alpha_c must be ≥ 0 and kappa > 0".into(),
            ));
        }
        Ok(RingParams { alpha_c, u0, delta_c, kappa })
    }
}

/// Linearized optomechanical parameters (recoil units).
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorParams {
    /// Trap frequency ω.
    pub omega: f64,
    /// Optomechanical coupling g (sign follows U₀α_c).
    pub g: f64,
    /// Pump–cavity detuning Δ_c.
    pub delta_c: f64,
    /// Cavity linewidth κ.
    pub kappa: f64,
    /// Lamb–Dicke parameter kξ₀.
    pub k_xi0: f64,
}

impl OscillatorParams {
    /// kξ₀ defaults to the trap-consistent value √(2ω_R/ω).
    pub fn new(omega: f64, g: f64, delta_c: f64, kappa: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega = {omega} must be > 0")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParams(format!("kappa = {kappa} must be > 0")));
        }
        Ok(OscillatorParams {
            omega,
            g,
            delta_c,
            kappa,
            k_xi0: (2.0 / omega).sqrt(),
        })
    }

    pub fn with_k_xi0(mut self, k_xi0: f64) -> Result<Self> {
        if !(k_xi0 > 0.0) {
            return Err(Error::InvalidParams(format!("k_xi0 = {k_xi0} must be > 0")));
        }
        self.k_xi0 = k_xi0;
        Ok(self)
    }
}

/// Map ring-cavity parameters onto the linearized oscillator model:
/// ω = √(4|U₀|α_c²) ω_R, kξ₀ = √(2ω_R/ω), g = U₀α_c·kξ₀/√2.
pub fn derive_effective_params(params: &RingParams) -> Result<OscillatorParams> {
    let omega = (4.0 * params.u0.abs() * params.alpha_c * params.alpha_c).sqrt();
    if !(omega > 0.0) {
        return Err(Error::InvalidParams(
            "effective trap frequency vanishes (U0·alpha_c² = 0)".into(),
        ));
    }
    let k_xi0 = (2.0 / omega).sqrt();
    let g = params.u0 * params.alpha_c * k_xi0 / 2.0_f64.sqrt();
    debug_assert!((k_xi0 * k_xi0 - 2.0 / omega).abs() <= 1e-10);
    Ok(OscillatorParams {
        omega,
        g,
        delta_c: params.delta_c,
        kappa: params.kappa,
        k_xi0,
    })
}

fn check_ring_space(space: &SpaceDescriptor) -> Result<(Factor, Factor, Factor)> {
    match space.factors() {
        [p1 @ Factor::MomentumLattice { .. }, p2 @ Factor::MomentumLattice { .. }, f @ Factor::FockSpace { .. }] => {
            Ok((p1.clone(), p2.clone(), f.clone()))
        }
        _ => Err(Error::WrongFactorStructure {
            expected: "(MomentumLattice, MomentumLattice, FockSpace)".into(),
            got: space.describe(),
        }),
    }
}

fn check_oscillator_space(space: &SpaceDescriptor) -> Result<(Factor, Factor, Factor)> {
    match space.factors() {
        [p1 @ Factor::FockSpace { .. }, p2 @ Factor::FockSpace { .. }, f @ Factor::FockSpace { .. }] => {
            Ok((p1.clone(), p2.clone(), f.clone()))
        }
        _ => Err(Error::WrongFactorStructure {
            expected: "(FockSpace, FockSpace, FockSpace)".into(),
            got: space.describe(),
        }),
    }
}

/// Full ring-cavity Hamiltonian on (lattice, lattice, field):
///
/// H = Σᵢ [pᵢ²/2m + U₀α_c² cos²(kxᵢ) + U₀ a†a sin²(kxᵢ)]
///     + (U₀α_c/2)(a + a†) Σᵢ sin(2kxᵢ) − Δ_c a†a.
pub fn build_ring_hamiltonian(
    params: &RingParams,
    space: &SpaceDescriptor,
) -> Result<SparseOperator> {
    let (p1, p2, field) = check_ring_space(space)?;
    let re = |x: f64| C64::new(x, 0.0);

    let a = annihilation_operator(&field)?;
    let n_f = number_operator(&field)?;
    let a_plus_adag = a.add(&a.adjoint())?;

    let mut terms: Vec<SparseOperator> = Vec::new();
    for (idx, lat) in [(0usize, &p1), (1usize, &p2)] {
        let mut parts: Vec<Option<&SparseOperator>> = vec![None, None, None];

        let kin = kinetic_operator(lat)?;
        parts[idx] = Some(&kin);
        terms.push(tensor(space, &parts)?);

        let cossq = trig_operator(lat, TrigKind::CosSqKx)?;
        parts[idx] = Some(&cossq);
        terms.push(tensor(space, &parts)?.scale(re(params.u0 * params.alpha_c * params.alpha_c)));

        let sinsq = trig_operator(lat, TrigKind::SinSqKx)?;
        parts[idx] = Some(&sinsq);
        parts[2] = Some(&n_f);
        terms.push(tensor(space, &parts)?.scale(re(params.u0)));
        parts[2] = None;

        let sin2k = trig_operator(lat, TrigKind::Sin2kx)?;
        parts[idx] = Some(&sin2k);
        parts[2] = Some(&a_plus_adag);
        terms.push(tensor(space, &parts)?.scale(re(0.5 * params.u0 * params.alpha_c)));
    }
    terms.push(tensor(space, &[None, None, Some(&n_f)])?.scale(re(-params.delta_c)));

    let mut h = terms.pop().expect("at least one term");
    for t in terms {
        h = h.add(&t)?;
    }
    h.into_hermitian()
}

/// Linearized optomechanical Hamiltonian on (Fock, Fock, Fock):
/// H = Σᵢ ω bᵢ†bᵢ − Δ_c a†a + g Σᵢ (bᵢ + bᵢ†)(a + a†).
pub fn build_linearized_hamiltonian(
    params: &OscillatorParams,
    space: &SpaceDescriptor,
) -> Result<SparseOperator> {
    let (p1, p2, field) = check_oscillator_space(space)?;
    let re = |x: f64| C64::new(x, 0.0);

    let n_f = number_operator(&field)?;
    let a = annihilation_operator(&field)?;
    let a_plus_adag = a.add(&a.adjoint())?;

    let mut terms: Vec<SparseOperator> = Vec::new();
    for (idx, osc) in [(0usize, &p1), (1usize, &p2)] {
        let mut parts: Vec<Option<&SparseOperator>> = vec![None, None, None];

        let n_b = number_operator(osc)?;
        parts[idx] = Some(&n_b);
        terms.push(tensor(space, &parts)?.scale(re(params.omega)));

        let b = annihilation_operator(osc)?;
        let b_plus_bdag = b.add(&b.adjoint())?;
        parts[idx] = Some(&b_plus_bdag);
        parts[2] = Some(&a_plus_adag);
        terms.push(tensor(space, &parts)?.scale(re(params.g)));
    }
    terms.push(tensor(space, &[None, None, Some(&n_f)])?.scale(re(-params.delta_c)));

    let mut h = terms.pop().expect("at least one term");
    for t in terms {
        h = h.add(&t)?;
    }
    h.into_hermitian()
}

/// Product state of two harmonic-approximation ground states in adjacent
/// (or `well_offset`-separated) minima of the cosine potential, with the
/// field in vacuum.
///
/// In momentum representation each particle is a Gaussian with
/// (Δp/ħk)² = ω/(4ω_R); a particle displaced by `well_offset` potential
/// minima (spacing π/k) picks up phases (−1)^(n·offset).
pub fn initial_state_two_wells(
    params: &RingParams,
    space: &SpaceDescriptor,
    well_offset: u32,
) -> Result<StateVector> {
    let (p1, p2, field) = check_ring_space(space)?;
    let omega = derive_effective_params(params)?.omega;
    let sigma_sq = omega / 4.0;
    let sigma = sigma_sq.sqrt();

    for lat in [&p1, &p2] {
        let Factor::MomentumLattice { cutoff } = lat else { unreachable!() };
        let needed = (4.0 * sigma).ceil() as usize;
        if *cutoff < needed {
            return Err(Error::LatticeTooSmall {
                needed,
                have: *cutoff,
            });
        }
    }

    let gaussian = |lat: &Factor, offset: u32| -> DVector<C64> {
        let Factor::MomentumLattice { cutoff } = lat else { unreachable!() };
        let n_cut = *cutoff as i64;
        let mut v = DVector::zeros(lat.dim());
        for (i, entry) in v.iter_mut().enumerate() {
            let n = i as i64 - n_cut;
            let amp = (-(n as f64).powi(2) / (4.0 * sigma_sq)).exp();
            // e^{−i n x₀} with x₀ = offset·π/k reduces to a sign.
            let sign = if (n * offset as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *entry = C64::new(amp * sign, 0.0);
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v / C64::new(norm, 0.0)
    };

    let mut vac = DVector::zeros(field.dim());
    vac[0] = C64::new(1.0, 0.0);

    let psi = StateVector::product(
        space.clone(),
        &[gaussian(&p1, 0), gaussian(&p2, well_offset), vac],
    )?;
    psi.renormalized()
}

/// Eigendecomposition of the scattering operator Σᵢ(bᵢ + bᵢ†) on the
/// truncated two-oscillator space.
///
/// Radiative states have |λᵢ| above the zero threshold; the nonzero
/// eigenvalues come in ± pairs.
#[derive(Debug, Clone)]
pub struct ScatteringBasis {
    space: SpaceDescriptor,
    eigenvalues: DVector<f64>,
    vectors: DMatrix<C64>,
}

/// Eigenvalues with |λ| below this are classified non-radiative.
pub const RADIATIVE_TOL: f64 = 1e-8;

impl ScatteringBasis {
    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors |eᵢ⟩ in the product
    /// Fock basis, ordered like [`Self::eigenvalues`].
    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn is_radiative(&self, i: usize) -> bool {
        self.eigenvalues[i].abs() > RADIATIVE_TOL
    }

    /// Coefficients cᵢ = ⟨eᵢ|ψ⟩ of a product-basis state.
    pub fn coefficients(&self, state: &StateVector) -> Result<DVector<C64>> {
        if *state.space() != self.space {
            return Err(Error::SpaceMismatch(format!(
                "state on {} vs scattering basis on {}",
                state.space().describe(),
                self.space.describe()
            )));
        }
        Ok(self.vectors.adjoint() * state.amplitudes())
    }

    /// Product-basis state Σᵢ cᵢ |eᵢ⟩.
    pub fn state_from_coefficients(&self, coeffs: &DVector<C64>) -> Result<StateVector> {
        if coeffs.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: coeffs.len(),
            });
        }
        StateVector::new(self.space.clone(), &self.vectors * coeffs)
    }
}

/// Diagonalize Σᵢ(bᵢ + bᵢ†) on two `fock_cutoff`-level oscillators.
///
/// A cutoff of at least 3 is needed for the toy model to capture the
/// post-jump photon-number jump correctly; 2 is the structural minimum.
pub fn scattering_basis(fock_cutoff: usize) -> Result<ScatteringBasis> {
    if fock_cutoff < 2 {
        return Err(Error::InvalidCutoff {
            min: 2,
            got: fock_cutoff,
        });
    }
    let osc = Factor::fock(fock_cutoff);
    let space = SpaceDescriptor::new(vec![osc.clone(), osc.clone()]);
    let b = annihilation_operator(&osc)?;
    let x = b.add(&b.adjoint())?;
    let s = tensor(&space, &[Some(&x), None])?.add(&tensor(&space, &[None, Some(&x)])?)?;

    let eig = s.to_dense().symmetric_eigen();
    let dim = space.total_dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());

    let mut eigenvalues = DVector::zeros(dim);
    let mut vectors = DMatrix::zeros(dim, dim);
    for (slot, &src) in order.iter().enumerate() {
        eigenvalues[slot] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        // Canonical phase: the largest-magnitude component is real positive.
        let vmax = col
            .iter()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .copied()
            .unwrap();
        let phase = if vmax.norm() > 0.0 {
            vmax.conj() / C64::new(vmax.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        vectors.column_mut(slot).copy_from(&(col * phase));
    }

    // Nonzero eigenvalues must occur in ± pairs.
    let nonzero: Vec<f64> = eigenvalues
        .iter()
        .cloned()
        .filter(|l| l.abs() > RADIATIVE_TOL)
        .collect();
    for &l in &nonzero {
        if !nonzero.iter().any(|&m| (m + l).abs() <= 1e-8) {
            return Err(Error::Numerical(format!(
                "scattering eigenvalue {l} lacks a ± partner"
            )));
        }
    }
    // Orthonormality of the eigenbasis.
    let gram = vectors.adjoint() * &vectors;
    let mut dev = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - C64::new(expect, 0.0)).norm());
        }
    }
    if dev > 1e-10 {
        return Err(Error::Numerical(format!(
            "scattering basis deviates from orthonormality by {dev:.3e}"
        )));
    }

    Ok(ScatteringBasis {
        space,
        eigenvalues,
        vectors,
    })
}

/// Cavity field amplitude α = −ig/(κ − iΔ_c) radiated per unit scattering
/// eigenvalue.
pub fn field_amplitude(params: &OscillatorParams) -> C64 {
    let num = C64::new(0.0, -params.g);
    let den = C64::new(params.kappa, -params.delta_c);
    num / den
}

/// Non-Hermitian toy-model generator, expressed in the scattering basis:
/// H_nH = ω Σᵢⱼ ⟨eᵢ|Σₖbₖ†bₖ|eⱼ⟩ |i⟩⟨j| − iκ Σᵢ |λᵢα|² |i⟩⟨i|.
///
/// The returned operator's indices refer to the scattering eigenbasis; its
/// space descriptor is the abstract index space of that basis.
pub fn build_toy_generator(
    params: &OscillatorParams,
    basis: &ScatteringBasis,
) -> Result<SparseOperator> {
    let dim = basis.dimension();
    let osc_dim = basis.space().factors()[0].dim();
    let osc = Factor::fock(osc_dim);
    let n_b = number_operator(&osc)?;
    let n_total = tensor(basis.space(), &[Some(&n_b), None])?
        .add(&tensor(basis.space(), &[None, Some(&n_b)])?)?;

    // ω U† (Σ n̂) U in the eigenbasis.
    let herm =
        basis.vectors.adjoint() * n_total.to_dense() * &basis.vectors * C64::new(params.omega, 0.0);

    let alpha_sq = field_amplitude(params).norm_sqr();
    let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
    for j in 0..dim {
        for i in 0..dim {
            let mut v = herm[(i, j)];
            if i == j {
                let lam = basis.eigenvalues[i];
                v += C64::new(0.0, -params.kappa * lam * lam * alpha_sq);
            }
            if v.norm() > 1e-15 {
                triplets.push((i, j, v));
            }
        }
    }
    SparseOperator::from_triplets(
        SpaceDescriptor::single(Factor::fock(dim)),
        triplets,
        false,
    )
}

/// Toy model assembled for time evolution in the product Fock basis:
/// Hermitian part ω Σᵢ bᵢ†bᵢ and collective jump operator
/// √(2κ)|α|·Σᵢ(bᵢ + bᵢ†).
#[derive(Debug, Clone)]
pub struct ToyModel {
    pub basis: ScatteringBasis,
    pub hamiltonian: SparseOperator,
    pub jump_operator: SparseOperator,
    pub alpha: C64,
}

impl ToyModel {
    pub fn new(params: &OscillatorParams, fock_cutoff: usize) -> Result<Self> {
        let basis = scattering_basis(fock_cutoff)?;
        let osc = Factor::fock(fock_cutoff);
        let space = basis.space().clone();
        let n_b = number_operator(&osc)?;
        let hamiltonian = tensor(&space, &[Some(&n_b), None])?
            .add(&tensor(&space, &[None, Some(&n_b)])?)?
            .scale(C64::new(params.omega, 0.0))
            .into_hermitian()?;
        let b = annihilation_operator(&osc)?;
        let x = b.add(&b.adjoint())?;
        let s = tensor(&space, &[Some(&x), None])?.add(&tensor(&space, &[None, Some(&x)])?)?;
        let alpha = field_amplitude(params);
        let jump_operator = s.scale(C64::new((2.0 * params.kappa).sqrt() * alpha.norm(), 0.0));
        Ok(ToyModel {
            basis,
            hamiltonian,
            jump_operator,
            alpha,
        })
    }
}

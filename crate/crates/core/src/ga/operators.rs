//! Binary GA operators: decoding, tournament selection, two-point crossover,
//! bit-flip mutation and elitist generational replacement.

use rand::seq::index;
use rand::Rng;

use super::{Chromosome, GaError};
use crate::geometry::SearchBox;
use crate::scalar::{cmp_fitness, Scalar};

/// Maps a bitstring onto `bx`.
///
/// Each dimension owns `bits_per_dim` consecutive bits read most-significant first as an
/// unsigned integer `u`; the coordinate is `lo + u / (2^bits - 1) * (hi - lo)`, clamped so
/// rounding can never leave the box.
pub fn decode<T: Scalar>(bits: &[bool], bx: &SearchBox<T>, bits_per_dim: u32) -> Result<Vec<T>, GaError> {
    let per = bits_per_dim as usize;
    if !(1..=32).contains(&bits_per_dim) || bits.len() != bx.dim() * per {
        return Err(GaError::LengthMismatch { expected: bx.dim() * per, actual: bits.len() });
    }
    let denom = T::from_u64((1u64 << bits_per_dim) - 1).expect("representable");
    Ok(bits
        .chunks_exact(per)
        .enumerate()
        .map(|(i, slice)| {
            let u = slice.iter().fold(0u64, |acc, &b| acc << 1 | b as u64);
            let (lo, hi) = bx.interval(i);
            if u == 0 {
                return lo;
            }
            let t = T::from_u64(u).expect("representable") / denom;
            let width = hi - lo;
            let x = if width.is_finite() { lo + t * width } else { lo * (T::one() - t) + hi * t };
            x.max(lo).min(hi)
        })
        .collect())
}

/// k-way tournament with replacement. Returns the population index of the winner;
/// among equal fitnesses the lowest index wins.
pub fn tournament_select<T: Scalar, R: Rng + ?Sized>(
    population: &[Chromosome<T>],
    k: usize,
    rng: &mut R,
) -> Result<usize, GaError> {
    if population.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    if let Some(i) = population.iter().position(|c| c.fitness.is_none()) {
        return Err(GaError::MissingFitness(i));
    }
    let fit = |i: usize| population[i].fitness.expect("checked above");
    let mut winner = rng.gen_range(0..population.len());
    for _ in 1..k.max(1) {
        let challenger = rng.gen_range(0..population.len());
        match cmp_fitness(fit(challenger), fit(winner)) {
            std::cmp::Ordering::Less => winner = challenger,
            std::cmp::Ordering::Equal if challenger < winner => winner = challenger,
            _ => {}
        }
    }
    Ok(winner)
}

/// Swaps the segment `(i, j]` (1-based positions) between two parents; with bits
/// indexed from 0 that is `i..j`. Children have no fitness.
pub fn crossover_at<T: Scalar>(
    a: &Chromosome<T>,
    b: &Chromosome<T>,
    i: usize,
    j: usize,
) -> Result<(Chromosome<T>, Chromosome<T>), GaError> {
    check_pair(a, b)?;
    let len = a.bits.len();
    if !(1 <= i && i < j && j < len) {
        return Err(GaError::BadCut { i, j, len });
    }
    let mut ca = a.bits.clone();
    let mut cb = b.bits.clone();
    ca[i..j].copy_from_slice(&b.bits[i..j]);
    cb[i..j].copy_from_slice(&a.bits[i..j]);
    Ok((Chromosome::new(ca), Chromosome::new(cb)))
}

/// Two-point crossover applied with probability `p_c`; otherwise the children are copies.
///
/// Draw order: one Bernoulli(`p_c`) draw, then (only when crossing) two distinct cut
/// positions from `1..len`.
pub fn two_point_crossover<T: Scalar, R: Rng + ?Sized>(
    a: &Chromosome<T>,
    b: &Chromosome<T>,
    p_c: f64,
    rng: &mut R,
) -> Result<(Chromosome<T>, Chromosome<T>), GaError> {
    check_pair(a, b)?;
    if !rng.gen_bool(p_c) {
        return Ok((Chromosome::new(a.bits.clone()), Chromosome::new(b.bits.clone())));
    }
    let cuts = index::sample(rng, a.bits.len() - 1, 2);
    let (x, y) = (cuts.index(0) + 1, cuts.index(1) + 1);
    crossover_at(a, b, x.min(y), x.max(y))
}

fn check_pair<T>(a: &Chromosome<T>, b: &Chromosome<T>) -> Result<(), GaError> {
    if a.bits.len() != b.bits.len() {
        return Err(GaError::LengthMismatch { expected: a.bits.len(), actual: b.bits.len() });
    }
    if a.bits.len() < 3 {
        return Err(GaError::ChromosomeTooShort(a.bits.len()));
    }
    Ok(())
}

/// Flips every bit independently with probability `p_m` (one draw per bit, in order).
/// `p_m == 0` consumes no randomness. Fitness is kept only if nothing flipped.
pub fn bitflip_mutate<T: Scalar, R: Rng + ?Sized>(c: &Chromosome<T>, p_m: f64, rng: &mut R) -> Chromosome<T> {
    if p_m <= 0.0 {
        return c.clone();
    }
    let mut flipped = false;
    let bits = c
        .bits
        .iter()
        .map(|&b| {
            if rng.gen_bool(p_m) {
                flipped = true;
                !b
            } else {
                b
            }
        })
        .collect();
    Chromosome { bits, fitness: if flipped { None } else { c.fitness } }
}

/// Elitist generational replacement: the `elite_count` best of `old` (ties by index)
/// followed by the first `old.len() - elite_count` offspring.
pub fn replace<T: Scalar>(
    old: &[Chromosome<T>],
    offspring: &[Chromosome<T>],
    elite_count: usize,
) -> Result<Vec<Chromosome<T>>, GaError> {
    if elite_count > old.len() {
        return Err(GaError::InvalidConfig(format!(
            "elite_count {elite_count} exceeds population {}",
            old.len()
        )));
    }
    let need = old.len() - elite_count;
    if offspring.len() < need {
        return Err(GaError::InsufficientOffspring { needed: need, got: offspring.len() });
    }
    let mut next = Vec::with_capacity(old.len());
    if elite_count > 0 {
        if let Some(i) = old.iter().position(|c| c.fitness.is_none()) {
            return Err(GaError::MissingFitness(i));
        }
        let mut order: Vec<usize> = (0..old.len()).collect();
        // stable sort keeps lower indices first among ties
        order.sort_by(|&x, &y| cmp_fitness(old[x].fitness.unwrap(), old[y].fitness.unwrap()));
        next.extend(order[..elite_count].iter().map(|&i| old[i].clone()));
    }
    next.extend_from_slice(&offspring[..need]);
    Ok(next)
}

//! Brute-force reference implementations. Nothing here calls into the
//! library algorithms being checked; they only share the data types.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet, VecDeque};

use katofan_core::abelian::FGAbelianGroup;
use katofan_core::monoid::{Element, FineMonoid, MonoidHom};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Rank and gcd of the maximal nonvanishing minors.
fn determinantal_data(a: &[Vec<i64>], cols: usize) -> (usize, i64) {
    let m = a.len();
    for k in (1..=m.min(cols)).rev() {
        let mut g = 0;
        for rs in subsets(m, k) {
            for cs in subsets(cols, k) {
                let sub: Vec<Vec<i64>> = rs
                    .iter()
                    .map(|&i| cs.iter().map(|&j| a[i][j]).collect())
                    .collect();
                g = gcd(g, det(&sub));
            }
        }
        if g != 0 {
            return (k, g);
        }
    }
    (0, 1)
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Cokernel of the `m x n` integer matrix `a` (rows given), computed by
/// enumerating cosets of the column span inside `(Z/N)^m` for a modulus `N`
/// large enough to separate the free summands from the torsion.
pub fn coset_cokernel(a: &[Vec<i64>], cols: usize) -> FGAbelianGroup {
    let m = a.len();
    if m == 0 {
        return FGAbelianGroup::trivial();
    }
    let (r, delta) = determinantal_data(a, cols);
    let delta = delta.unsigned_abs();
    let free = m - r;
    let modulus = if free == 0 { delta } else { 2 * delta };
    if modulus == 1 {
        return FGAbelianGroup::trivial();
    }

    let n = modulus as usize;
    let size = n.pow(m as u32);
    let encode = |v: &[usize]| v.iter().rev().fold(0usize, |acc, &x| acc * n + x);
    let decode = |mut idx: usize| {
        let mut v = vec![0usize; m];
        for x in v.iter_mut() {
            *x = idx % n;
            idx /= n;
        }
        v
    };
    let columns: Vec<Vec<usize>> = (0..cols)
        .map(|j| {
            (0..m)
                .map(|i| a[i][j].rem_euclid(modulus as i64) as usize)
                .collect()
        })
        .collect();

    // closure of the column span
    let mut in_h = vec![false; size];
    in_h[0] = true;
    let mut queue = VecDeque::from([0usize]);
    let mut h_size = 1usize;
    while let Some(idx) = queue.pop_front() {
        let v = decode(idx);
        for c in &columns {
            let w: Vec<usize> = v.iter().zip(c).map(|(x, y)| (x + y) % n).collect();
            let k = encode(&w);
            if !in_h[k] {
                in_h[k] = true;
                h_size += 1;
                queue.push_back(k);
            }
        }
    }

    // p-primary structure from the sizes of the p^j-torsion subgroups
    let mut exponents: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for (p, vmax) in prime_factors(modulus) {
        let mut logs = vec![0u32];
        let mut pj = 1usize;
        for _ in 1..=vmax {
            pj *= p as usize;
            let count = (0..size)
                .filter(|&idx| {
                    let (mut rest, mut scaled, mut place) = (idx, 0usize, 1usize);
                    for _ in 0..m {
                        scaled += ((rest % n) * pj % n) * place;
                        rest /= n;
                        place *= n;
                    }
                    in_h[scaled]
                })
                .count();
            assert_eq!(count % h_size, 0);
            let mut c = count / h_size;
            let mut l = 0;
            while c > 1 {
                assert_eq!(c % p as usize, 0);
                c /= p as usize;
                l += 1;
            }
            logs.push(l);
        }
        // number of cyclic p-factors of exponent >= j is logs[j] - logs[j-1]
        let mut parts = Vec::new();
        for j in 1..logs.len() {
            let at_least_j = logs[j] - logs[j - 1];
            let at_least_next = if j + 1 < logs.len() {
                logs[j + 1] - logs[j]
            } else {
                0
            };
            for _ in 0..(at_least_j - at_least_next) {
                parts.push(j as u32);
            }
        }
        parts.sort_unstable_by(|x, y| y.cmp(x));
        exponents.insert(p, parts);
    }

    let count = exponents.values().map(Vec::len).max().unwrap_or(0);
    let mut factors: Vec<u64> = (0..count)
        .map(|t| {
            exponents
                .iter()
                .map(|(&p, parts)| parts.get(t).map_or(1, |&e| p.pow(e)))
                .product()
        })
        .collect();
    // largest first; the top `free` factors are the free summands read mod N
    for f in factors.iter().take(free) {
        assert_eq!(*f, modulus, "free summand not separated");
    }
    factors.drain(..free.min(factors.len()));
    let mut torsion: Vec<BigInt> = factors
        .into_iter()
        .filter(|&f| f > 1)
        .map(BigInt::from)
        .collect();
    torsion.reverse();
    FGAbelianGroup::new(free, torsion).expect("divisor chain")
}

fn add_reduced(x: &[BigInt], y: &[BigInt], rank: usize, moduli: &[BigInt]) -> Element {
    x.iter()
        .zip(y)
        .enumerate()
        .map(|(i, (a, b))| {
            let s = a + b;
            if i < rank {
                s
            } else {
                let d = &moduli[i - rank];
                ((s % d) + d) % d
            }
        })
        .collect()
}

/// Every element reachable as a sum of at most `bound` generators.
pub fn reachable(m: &FineMonoid, bound: usize) -> HashSet<Element> {
    let amb = m.ambient();
    let rank = amb.rank();
    let moduli = amb.moduli().to_vec();
    let zero: Element = vec![BigInt::zero(); amb.dim()];
    let mut seen: HashSet<Element> = HashSet::from([zero.clone()]);
    let mut layer = vec![zero];
    for _ in 0..bound {
        let mut next = Vec::new();
        for x in &layer {
            for g in m.generators() {
                let y = add_reduced(x, g, rank, &moduli);
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    seen
}

/// Sum of generators with the given coefficients, reduced in the ambient group.
pub fn evaluate(m: &FineMonoid, coeffs: &[BigInt]) -> Element {
    let amb = m.ambient();
    let mut acc: Element = vec![BigInt::zero(); amb.dim()];
    for (c, g) in coeffs.iter().zip(m.generators()) {
        let scaled: Element = g.iter().map(|x| x * c).collect();
        acc = add_reduced(&acc, &scaled, amb.rank(), amb.moduli());
    }
    acc
}

/// All points of the ambient group with free coordinates in `[lo, hi]`
/// and torsion coordinates in their canonical range.
pub fn ambient_box(m: &FineMonoid, lo: i64, hi: i64) -> Vec<Element> {
    let amb = m.ambient();
    let mut ranges: Vec<Vec<BigInt>> = (0..amb.rank())
        .map(|_| (lo..=hi).map(BigInt::from).collect())
        .collect();
    for d in amb.moduli() {
        let d = d.to_i64().expect("small modulus");
        ranges.push((0..d).map(BigInt::from).collect());
    }
    let mut out: Vec<Element> = vec![vec![]];
    for r in ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                r.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x.clone());
                    q
                })
            })
            .collect();
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

/// Number of joint faces of `(N^a0, ..., N^an)` over the trivial base:
/// a root face of rank `k` in `N^a0` together with a rank-`k` face and an
/// identification of its generators in each other member.
pub fn free_joint_face_count(ranks: &[u64]) -> u64 {
    let (&first, rest) = ranks.split_first().expect("nonempty tuple");
    (0..=first)
        .map(|k| {
            binomial(first, k)
                * rest
                    .iter()
                    .map(|&a| binomial(a, k) * factorial(k))
                    .product::<u64>()
        })
        .sum()
}

pub fn is_nonnegative(c: &[BigInt]) -> bool {
    c.iter().all(|x| !x.is_negative())
}

/// Every hom `P -> Q` sending each generator to an element of degree at most `degree`.
pub fn small_homs(p: &FineMonoid, q: &FineMonoid, degree: usize) -> Vec<MonoidHom> {
    let mut candidates: Vec<Element> = reachable(q, degree).into_iter().collect();
    candidates.sort();
    let mut out = Vec::new();
    let mut choice = vec![0usize; p.len()];
    loop {
        let images: Vec<Element> = choice.iter().map(|&i| candidates[i].clone()).collect();
        if let Ok(h) = MonoidHom::new(p.clone(), q.clone(), images) {
            out.push(h);
        }
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < candidates.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            return out;
        }
    }
}

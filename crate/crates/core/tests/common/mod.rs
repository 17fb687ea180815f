//! Brute-force oracles shared by the integration tests. Vectors of up to
//! 32 cells are packed into the low bits of a `u32`.
#![allow(dead_code)]

/// `P(y | x)` when each cell agrees with probability `p`.
pub fn likelihood(x: u32, y: u32, n: u32, p: f64) -> f64 {
    let mask = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let agree = (!(x ^ y) & mask).count_ones() as i32;
    p.powi(agree) * (1.0 - p).powi(n as i32 - agree)
}

/// Missing cells take the exemplar's value.
pub fn impute(x: u32, y: u32, missing: u32) -> u32 {
    (y & !missing) | (x & missing)
}

pub fn to_bits(v: u32, n: u32) -> String {
    (0..n).map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// The latent with the `missing` cells replaced by `?`.
pub fn to_latent(y: u32, missing: u32, n: u32) -> String {
    (0..n)
        .map(|i| {
            if missing >> i & 1 == 1 {
                '?'
            } else if y >> i & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// `E[δ_Impute]` by enumerating every exemplar, every latent and every mask
/// of exactly `k` cells. The exemplar has a minutia in each cell with
/// probability `q`; the latent agrees cell-wise with probability `a`.
pub fn exhaustive_delta_impute(n: u32, k: u32, q: f64, a: f64, p_same: f64, p_diff: f64) -> f64 {
    let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() == k).collect();
    let mut total = 0.0;
    for x in 0..1u32 << n {
        let px = {
            let ones = x.count_ones() as i32;
            q.powi(ones) * (1.0 - q).powi(n as i32 - ones)
        };
        for y in 0..1u32 << n {
            let py = likelihood(x, y, n, a);
            let lr = |v: u32| likelihood(x, v, n, p_same) / likelihood(x, v, n, p_diff);
            let truth = lr(y);
            let mean_over_masks: f64 =
                masks.iter().map(|&m| lr(impute(x, y, m)) / truth).sum::<f64>() / masks.len() as f64;
            total += px * py * mean_over_masks;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac(i128, i128);

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Frac {
    pub fn new(n: i128, d: i128) -> Self {
        let g = gcd(n, d).max(1);
        Frac(n / g, d / g)
    }
    fn zero() -> Self {
        Frac(0, 1)
    }
    fn one() -> Self {
        Frac(1, 1)
    }
    fn add(self, o: Self) -> Self {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Self) -> Self {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
    fn parse(s: &str) -> Self {
        match s.split_once('/') {
            Some((n, d)) => Frac::new(n.trim().parse().unwrap(), d.trim().parse().unwrap()),
            None => {
                let (int, frac) = s.split_once('.').unwrap_or((s, ""));
                let d = 10i128.pow(frac.len() as u32);
                Frac::new(format!("{int}{frac}").parse().unwrap(), d)
            }
        }
    }
}

pub struct Node {
    pub name: String,
    pub card: usize,
    pub parents: Vec<usize>,
    pub table: Vec<Vec<Frac>>,
}

/// Reads the fixture file without going through the library parser.
pub fn nodes(text: &str) -> Vec<Node> {
    let doc: toml::Table = text.parse().unwrap();
    let mut out: Vec<Node> = Vec::new();
    for f in doc["factor"].as_array().unwrap() {
        let f = f.as_table().unwrap();
        let parents = f
            .get("parents")
            .and_then(|p| p.as_array())
            .map(|a| {
                a.iter()
                    .map(|p| out.iter().position(|n| n.name == p.as_str().unwrap()).unwrap())
                    .collect()
            })
            .unwrap_or_default();
        let table = f["table"]
            .as_array()
            .unwrap()
            .iter()
            .map(|row| row.as_array().unwrap().iter().map(|c| Frac::parse(c.as_str().unwrap())).collect())
            .collect();
        out.push(Node {
            name: f["variable"].as_str().unwrap().to_string(),
            card: f["values"].as_array().unwrap().len(),
            parents,
            table,
        });
    }
    out
}

/// Exact probability of every full assignment.
fn enumerate(nodes: &[Node]) -> Vec<(Vec<usize>, Frac)> {
    let mut out = vec![(Vec::new(), Frac::one())];
    for node in nodes {
        let mut next = Vec::new();
        for (assign, p) in &out {
            let row = node.parents.iter().fold(0, |acc, &q| acc * nodes[q].card + assign[q]);
            for v in 0..node.card {
                let mut a = assign.clone();
                a.push(v);
                next.push((a, p.mul(node.table[row][v])));
            }
        }
        out = next;
    }
    out
}

/// `P(X,Y | E=e) == P(X,Y | I=i, E=e)` for every `(x, y, i, e)`, compared
/// exactly by cross-multiplication.
pub fn oracle_irrelevant(nodes: &[Node]) -> bool {
    let idx = |n: &str| nodes.iter().position(|v| v.name == n).unwrap();
    let (x, y, i, e) = (idx("X"), idx("Y"), idx("I"), idx("E"));
    let atoms = enumerate(nodes);
    let sum = |pred: &dyn Fn(&[usize]) -> bool| {
        atoms.iter().filter(|(a, _)| pred(a)).fold(Frac::zero(), |acc, (_, p)| acc.add(*p))
    };
    for ev in 0..nodes[e].card {
        let p_e = sum(&|a| a[e] == ev);
        for iv in 0..nodes[i].card {
            let p_ie = sum(&|a| a[e] == ev && a[i] == iv);
            for xv in 0..nodes[x].card {
                for yv in 0..nodes[y].card {
                    let p_xye = sum(&|a| a[e] == ev && a[x] == xv && a[y] == yv);
                    let p_xyie = sum(&|a| a[e] == ev && a[i] == iv && a[x] == xv && a[y] == yv);
                    if p_xye.mul(p_ie) != p_xyie.mul(p_e) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

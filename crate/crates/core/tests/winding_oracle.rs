use nssl::locate::{locate_zeros, winding_number, ComplexBox, Evaluator, LocateError, LocateOptions, WindingOptions};
use nssl::scaled::ScaledComplex;
use nssl::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Roots = Vec<(Complex64, i32)>;

fn product(roots: Roots) -> impl Fn(Complex64) -> Result<ScaledComplex, LocateError> + Sync {
    move |z| {
        let v = roots.iter().fold(Complex64::new(1.0, 0.0), |acc, (r, m)| acc * (z - r).powi(*m));
        Ok(ScaledComplex::from_complex(v))
    }
}

fn random_case(rng: &mut StdRng, bx: &ComplexBox) -> Option<Roots> {
    let mut roots = Vec::new();
    for _ in 0..2 {
        let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let edge = [z.re - bx.re_min, bx.re_max - z.re, z.im - bx.im_min, bx.im_max - z.im]
            .into_iter()
            .map(f64::abs)
            .fold(f64::INFINITY, f64::min);
        if edge < 1e-3 {
            return None;
        }
        roots.push((z, rng.gen_range(1..=3)));
    }
    Some(roots)
}

fn inside(bx: &ComplexBox, roots: &Roots) -> i64 {
    roots.iter().filter(|(z, _)| bx.contains(*z)).map(|(_, m)| *m as i64).sum()
}

#[test]
fn winding_counts_roots_with_multiplicity() {
    let mut rng = StdRng::seed_from_u64(7);
    let bx = ComplexBox::new(-2.0, 2.0, -1.5, 2.5).unwrap();
    let mut trials = 0;
    while trials < 1000 {
        let Some(roots) = random_case(&mut rng, &bx) else { continue };
        trials += 1;
        let expected = inside(&bx, &roots);
        let ev = Evaluator::new(product(roots.clone()));
        let n = winding_number(&ev, &bx, &WindingOptions::default()).unwrap();
        assert_eq!(n, expected, "roots {roots:?}");
    }
}

#[test]
fn subdivision_is_additive_and_finds_every_root() {
    let mut rng = StdRng::seed_from_u64(11);
    let bx = ComplexBox::new(-2.0, 2.0, -2.0, 2.0).unwrap();
    let opts = LocateOptions::default();
    let mut trials = 0;
    while trials < 1000 {
        let Some(roots) = random_case(&mut rng, &bx) else { continue };
        if (roots[0].0 - roots[1].0).norm() < 1e-2 {
            continue;
        }
        trials += 1;
        let ev = Evaluator::new(product(roots.clone()));
        let search = locate_zeros(&ev, &bx, &opts).unwrap();
        assert_eq!(search.additivity_violations, 0, "roots {roots:?}");
        assert_eq!(search.total_winding, inside(&bx, &roots));
        // multiple roots are only isolated, simple ones are polished
        let isolation = opts.isolation * search.searched.diagonal();
        for (z, m) in roots.iter().filter(|(z, _)| bx.contains(*z)) {
            let reach = if *m == 1 { 1e-9 } else { isolation };
            let hit = search
                .estimates
                .iter()
                .find(|e| (e.lambda - z).norm() <= reach)
                .unwrap_or_else(|| panic!("root {z} missing from {:?}", search.estimates));
            assert_eq!(hit.multiplicity, *m as i64);
            assert_eq!(hit.refined, *m == 1);
        }
    }
}

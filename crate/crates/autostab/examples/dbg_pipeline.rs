use autostab::classify::{classify, ClassifyConfig, Verdict};
use autostab::corpus::build;
use autostab::digits::Base;
use autostab::fsets::coset_automaton;
use num_bigint::BigInt;
use std::time::Instant;

fn big(v: i64) -> BigInt { BigInt::from(v) }

fn main() {
    // coset(2,5) base 10 -> stable
    let base = Base::new(10).unwrap();
    let c = coset_automaton(&big(2), &big(5), base).unwrap();
    let t = Instant::now();
    match classify(&c, &ClassifyConfig::new(base)) {
        Ok(Verdict::Stable(cert)) => println!("coset(2,5): stable ({:?}), fset = {}", t.elapsed(), cert.fset.render()),
        Ok(v) => println!("coset(2,5): UNEXPECTED {}", v.kind()),
        Err(e) => println!("coset(2,5): ERR {e}"),
    }

    // evenlen d=3 (criterion 9 needs both bases)
    let b3 = Base::new(3).unwrap();
    let e3 = build("evenlen", b3).unwrap();
    let t = Instant::now();
    match classify(&e3, &ClassifyConfig::new(b3)) {
        Ok(v) => println!("evenlen d=3: {} ({:?})", v.kind(), t.elapsed()),
        Err(e) => println!("evenlen d=3: ERR {e}"),
    }

    //翻译-invariance sanity: classify(translate(re0102, c)) same kind
    let a = build("re0102", b3).unwrap();
    for c in [1i64, -1, 3, -3] {
        let tr = a.translate_scalar(&big(c)).unwrap();
        let t = Instant::now();
        match classify(&tr, &ClassifyConfig::new(b3)) {
            Ok(v) => println!("re0102 + {c}: {} ({:?})", v.kind(), t.elapsed()),
            Err(e) => println!("re0102 + {c}: ERR {e}"),
        }
    }

    // powers d=10 (classify example) and nat (mixed case!)
    let p10 = build("powers", base).unwrap();
    let t = Instant::now();
    match classify(&p10, &ClassifyConfig::new(base)) {
        Ok(v) => println!("powers d=10: {} ({:?})", v.kind(), t.elapsed()),
        Err(e) => println!("powers d=10: ERR {e}"),
    }

    // N inside Z: mixed?? N is non-sparse; N cap N = N generic; -N cap N = {0} sparse -> mixed case -> unstable
    let nat = autostab::autoset::AutoSet::nat(b3);
    let t = Instant::now();
    match classify(&nat, &ClassifyConfig::new(b3)) {
        Ok(Verdict::Unstable(u)) => println!("nat: unstable via {} ({:?})", u.provenance.as_str(), t.elapsed()),
        Ok(v) => println!("nat: UNEXPECTED {}", v.kind()),
        Err(e) => println!("nat: ERR {e}"),
    }

    // union of coset and sparse: (0 mod 4) U powers-ish: stable boolean combo
    let freak = coset_automaton(&big(0), &big(4), b3).unwrap()
        .union(&build("powers", b3).unwrap()).unwrap();
    let t = Instant::now();
    match classify(&freak, &ClassifyConfig::new(b3)) {
        Ok(v) => println!("coset(0,4) U powers: {} ({:?})", v.kind(), t.elapsed()),
        Err(e) => println!("coset(0,4) U powers: ERR {e}"),
    }
}

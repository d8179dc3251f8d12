use seclab::classes::{classify, ClassifyOptions, Verdict};
use seclab::common_info::conditional_common_function;
use seclab::corpus::{self, Generator};
use seclab::entropy::{evaluate, EntropyQuery};
use seclab::secrecy::intrinsic::{intrinsic_information, IntrinsicOptions};
use seclab::secrecy::keycost::{winter_key_cost, KeyCostOptions};
use seclab::secrecy::reversibility::{decide_reversibility, Status};
use seclab::Roles;

#[test]
fn expected_values_reverify() {
    for e in corpus::manifest() {
        let t = corpus::named(e.name).unwrap();
        let roles = Roles::default();
        for x in &e.expected {
            let got = match x.quantity {
                "intrinsic" => intrinsic_information(&t, &roles, &IntrinsicOptions::default()).unwrap().value,
                "keycost" => winter_key_cost(&t, &roles, &KeyCostOptions::default()).unwrap().value,
                "key" => {
                    let r = decide_reversibility(&t, &roles, &ClassifyOptions::default()).unwrap();
                    assert_eq!(r.status, Status::Reversible, "{}", e.name);
                    r.key_value.unwrap()
                }
                "H(J|Z)" => conditional_common_function(&t, "X", "Y", &["Z"]).unwrap().conditional_entropy,
                "p(Z=0)" => t.marginalize(&["Z"]).unwrap().mass()[0],
                q => evaluate(&t, &EntropyQuery::parse(q).unwrap()).unwrap(),
            };
            assert!((got - x.value).abs() < 1e-6, "{} {}: {got} vs {}", e.name, x.quantity, x.value);
        }
    }
}

#[test]
fn manifest_classes_match() {
    for e in corpus::manifest() {
        let r = classify(&corpus::named(e.name).unwrap(), &Roles::default(), &ClassifyOptions::default()).unwrap();
        for (class, want) in &e.classes {
            let want = if *want == "yes" { Verdict::Yes } else { Verdict::No };
            assert_eq!(r.verdicts[*class], want, "{} {class}", e.name);
        }
    }
}

#[test]
fn generators_match_their_class() {
    for g in Generator::ALL {
        for seed in 0..10 {
            let r = classify(&g.generate(seed), &Roles::default(), &ClassifyOptions::default()).unwrap();
            assert_eq!(r.verdicts[g.class()], Verdict::Yes, "{} seed {seed}", g.name());
        }
    }
}

#[test]
fn label_permutation_covariance() {
    // relabeling X and Y together must not change any verdict or quantity
    let t = corpus::named("MIXED_2X3").unwrap();
    let p = t.permute_labels("X", &[1, 0]).unwrap().permute_labels("Y", &[2, 0, 1]).unwrap();
    let opts = ClassifyOptions::default();
    let (a, b) = (classify(&t, &Roles::default(), &opts).unwrap(), classify(&p, &Roles::default(), &opts).unwrap());
    assert_eq!(a.verdicts, b.verdicts);
    let ia = intrinsic_information(&t, &Roles::default(), &IntrinsicOptions::default()).unwrap().value;
    let ib = intrinsic_information(&p, &Roles::default(), &IntrinsicOptions::default()).unwrap().value;
    assert!((ia - ib).abs() < 1e-9);
}

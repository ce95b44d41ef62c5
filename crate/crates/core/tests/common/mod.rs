use liesym::exprcore::Expr;
use proptest::prelude::*;

pub fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        Just(Expr::var("p")),
        (-5i64..=5).prop_map(Expr::int),
        (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::frac(n, d)),
    ]
}

pub fn tree(depth: u32, transcendental: bool) -> BoxedStrategy<Expr> {
    let leaf = leaf().boxed();
    leaf.prop_recursive(depth, 48, 3, move |inner| {
        let mut options = vec![
            prop::collection::vec(inner.clone(), 2..4)
                .prop_map(Expr::add)
                .boxed(),
            prop::collection::vec(inner.clone(), 2..4)
                .prop_map(Expr::mul)
                .boxed(),
            (inner.clone(), -2i64..=3)
                .prop_map(|(b, n)| Expr::pow(b, Expr::int(n)))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| a / b)
                .boxed(),
        ];
        if transcendental {
            options.push(inner.clone().prop_map(Expr::exp).boxed());
            options.push(inner.clone().prop_map(Expr::ln).boxed());
            options.push(inner.clone().prop_map(Expr::sqrt).boxed());
        }
        proptest::strategy::Union::new(options)
    })
    .boxed()
}

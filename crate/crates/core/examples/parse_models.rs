//! Loading the same kind of model from the three supported text formats,
//! and building a feature tree in code.

use twise::model::{compile_tree, parse_dimacs, parse_native, parse_tree, serialize_native, GroupKind};
use twise::sat::{is_valid_tset, SamplerSession};
use twise::{FeatureTree, TSet};

const DIMACS: &str = "\
c a small constrained model
c i 1 engine
c i 2 electric
c i 3 petrol
p cnf 3 3
1 0
-2 -3 0
2 3 0
";

const NATIVE: &str = r#"{"features": ["base", "logging", "remote"], "clauses": [[1], [-3, 2]]}"#;

const PHONE: &str = include_str!("../data/phone.tree");

fn main() -> anyhow::Result<()> {
    let car = parse_dimacs(DIMACS)?;
    println!("dimacs: {:?}, {} clauses", car.features(), car.clauses().len());

    let app = parse_native(NATIVE)?;
    print!("native round trip: {}", serialize_native(&app));
    let remote_without_logging = TSet::new(vec![3, -2])?;
    println!("remote without logging valid: {}", is_valid_tset(&app, &remote_without_logging)?);

    let phone = compile_tree(&parse_tree(PHONE)?);
    let products: Vec<_> = SamplerSession::new(&phone, 1)?.take(10).collect();
    let mut distinct = products.clone();
    distinct.sort();
    distinct.dedup();
    println!("phone: {} features, {} distinct products in 10 draws", phone.num_features(), distinct.len());

    let mut tree = FeatureTree::new("Editor")?;
    let root = tree.root();
    tree.add_mandatory(root, "Buffer")?;
    let syntax = tree.add_optional(root, "Syntax")?;
    let themes = tree.add_group(root, GroupKind::Xor, &["Light", "Dark"])?;
    tree.requires(syntax, themes[1])?;
    let editor = compile_tree(&tree);
    println!("editor: {:?}", editor.features());
    for p in SamplerSession::new(&editor, 3)?.take(3) {
        let on: Vec<&str> = (1..=editor.num_features())
            .filter(|&f| p.is_selected(f))
            .map(|f| editor.feature_name(f))
            .collect();
        println!("  {on:?}");
    }
    Ok(())
}

//! Clustering scores: accuracy under the best label matching, normalized
//! mutual information, and the assignment solver behind the matching.

use stcluster::corpus::LabelVector;
use stcluster::metrics::{clustering_accuracy, contingency, linear_assignment, nmi, NmiNormalization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = LabelVector::new(&[0, 0, 0, 1, 1, 1, 2, 2]);
    let pred = LabelVector::new(&[2, 2, 1, 0, 0, 0, 1, 1]);
    println!("contingency {:?}", contingency(&truth, &pred)?);
    println!("acc {:.4}", clustering_accuracy(&truth, &pred)?);
    for norm in [NmiNormalization::Geometric, NmiNormalization::Arithmetic] {
        println!("nmi ({norm:?}) {:.4}", nmi(&truth, &pred, norm)?);
    }

    let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
    let (assignment, total) = linear_assignment(&cost);
    println!("assignment {assignment:?}, cost {total}");
    Ok(())
}

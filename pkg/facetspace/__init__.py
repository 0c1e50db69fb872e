"""Face-perimeter and face-area configuration spaces of convex polytopes in R^3."""

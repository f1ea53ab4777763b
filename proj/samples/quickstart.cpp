// Persistence features of a small spectrum, their diagram, and the effect of
// the top-k% filter.

#include <iostream>

#include "pertrans/pertrans.hpp"

int main() {
  using namespace pertrans;

  const Spectrum s({100, 101, 102, 103, 104, 105, 106, 107}, {0, 2, 1, 6, 2, 3, 0.5, 1});

  const auto triples = transform(s);
  std::cout << "position,mz,birth,death,persistence\n";
  write_features_csv(std::span<const FeatureTriple>(triples), s.mz(), std::cout);

  const auto pairs = reduce(triples);
  std::cout << "\nreduced: " << pairs.size() << " peaks, " << stored_scalars(pairs) << " scalars\n";

  const auto top = filter_top_k(pairs, 50);
  std::cout << "top 50%:\n";
  write_features_csv(std::span<const PersistencePair>(top), s.mz(), std::cout);

  const std::vector<double> mirrored(s.intensity().rbegin(), s.intensity().rend());
  std::cout << "\nbottleneck distance to the mirrored spectrum: "
            << bottleneck_distance(to_diagram(triples), to_diagram(transform(mirrored))) << '\n';
}

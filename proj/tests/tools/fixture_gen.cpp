// Rewrites fixtures/mutants/*.xml and fixtures/index.json from the catalog.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "didlkit/fixtures.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: fixture_gen <fixtures-dir>\n";
    return 2;
  }
  fs::path root = argv[1];
  fs::create_directories(root / "mutants");
  auto write = [](const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
  for (const auto& op : didlkit::fixtures::mutation_operators()) {
    write(root / "mutants" / ("mutant-table9-" + op.name + ".xml"), didlkit::fixtures::mutant_bytes(op));
  }
  write(root / "index.json", didlkit::fixtures::index_json());
  std::cout << "wrote " << didlkit::fixtures::mutation_operators().size() << " mutants and index.json\n";
  return 0;
}

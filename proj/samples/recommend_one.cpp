// Minimal in-process use of the library: load a seed file, run one query
// through retrieve + reuse, print the answer.
//
//   recommend_one samples/data/seed_cases.json "texto del lector"

#include <iostream>

#include "casebook/casebook.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: recommend_one <seed.json> <text>\n";
    return 2;
  }
  try {
    auto pipeline = std::make_shared<const casebook::Pipeline>();
    casebook::CaseStore store(pipeline);
    store.import_seed(argv[1]);

    casebook::EngineConfig config;
    auto query = casebook::make_query(casebook::RawText{argv[2], "argv"}, *pipeline);
    auto result = casebook::retrieve(query, *store.snapshot(), config);
    auto rec = casebook::reuse(result, config);

    std::cout << rec.reliability_message << '\n';
    for (const auto& p : rec.picks)
      std::cout << "  " << p.book_title << " [" << p.personality.code() << "] " << p.score << '\n';
  } catch (const casebook::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}

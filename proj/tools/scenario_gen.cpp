// Writes the bundled example scenarios as JSON files.
#include <filesystem>
#include <iostream>

#include "laneless/io.hpp"
#include "laneless/presets.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "scenarios";
  std::filesystem::create_directories(dir);
  using namespace laneless;
  for (const Scenario& sc :
       {presets::steady_flow_16(), presets::formation_change_16(),
        presets::obstacle_16(), presets::lane_change_16(),
        presets::chain_3()}) {
    std::string name = sc.name;
    for (char& ch : name)
      if (ch == '-') ch = '_';
    const std::filesystem::path file = dir / (name + ".json");
    write_scenario(file, sc);
    std::cout << "wrote " << file.string() << "\n";
  }
  return 0;
}

#include <iostream>
#include <string>
#include <vector>

#include "saddlescape/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    saddlescape::cli::CliConfig cfg = saddlescape::cli::parse_args(args);
    return saddlescape::cli::dispatch(cfg);
  } catch (const saddlescape::cli::HelpRequested& h) {
    std::cout << h.text;
    return 0;
  } catch (const saddlescape::cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}

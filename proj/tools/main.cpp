#include "cli.hpp"

int main(int argc, char** argv) { return eigenevent::cli::run(argc, argv); }

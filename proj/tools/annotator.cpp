#include "annotator/cli.hpp"

int main(int argc, char** argv) { return annotator::run_cli(argc, argv); }

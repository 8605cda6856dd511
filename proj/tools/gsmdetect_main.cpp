#include "gsmdetect/config.hpp"

int main(int argc, char** argv) { return gsmdet::run_cli(argc, argv); }

#include "levrotor/app.hpp"

int main(int argc, char** argv) { return levrotor::run_cli(argc, argv); }

